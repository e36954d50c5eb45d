# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled block kernels (hot loops of the path engines).

Bit-identical to `_kernels_py`: the numpy fallback uses sequential
folds (cumsum / maximum.accumulate), mirrored here as plain loops in
the same evaluation order.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def skorokhod_block(double[:, ::1] incr, double[::1] b0, double[::1] g0):
    """Reflect one block; see the numpy twin for the contract."""
    cdef Py_ssize_t n = incr.shape[0], m = incr.shape[1]
    b_arr = np.empty((n, m))
    g_arr = np.empty((n, m))
    cdef double[:, ::1] b = b_arr
    cdef double[:, ::1] g = g_arr
    cdef Py_ssize_t i, j
    cdef double bb, gg
    with nogil:
        for i in range(n):
            bb = b0[i]
            gg = g0[i]
            for j in range(m):
                bb = bb + incr[i, j]
                if -bb > gg:
                    gg = -bb
                b[i, j] = bb
                g[i, j] = gg
    return b_arr, g_arr


def boundary_tally_block(double[:, ::1] dj, double[::1] cj0, long k0, double dt, double t):
    """Plateau mass before outer time t; see the numpy twin."""
    cdef Py_ssize_t n = dj.shape[0], m = dj.shape[1]
    tally_arr = np.zeros(n)
    cj_arr = np.empty(n)
    cdef double[::1] tally = tally_arr
    cdef double[::1] cj_end = cj_arr
    cdef Py_ssize_t i, j
    cdef double cj, acc, room, contrib
    with nogil:
        for i in range(n):
            cj = cj0[i]
            acc = 0.0
            for j in range(m):
                room = t - (k0 + 1 + j) * dt - cj
                contrib = room
                if contrib < 0.0:
                    contrib = 0.0
                if contrib > dj[i, j]:
                    contrib = dj[i, j]
                acc = acc + contrib
                cj = cj + dj[i, j]
            tally[i] = acc
            cj_end[i] = cj
    return tally_arr, cj_arr
