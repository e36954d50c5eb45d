"""Block kernels: compiled/fallback bit-identity and carry semantics.

The engines stream paths through these kernels in blocks, carrying state
between calls; reproducibility therefore requires (a) both backends
round identically and (b) splitting a block is invisible.  Both are
tested bitwise -- approx would hide real divergence.
"""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stickybm._backend import available_backends

BACKENDS = available_backends()
numpy_k = BACKENDS["numpy"]

needs_compiled = pytest.mark.skipif(
    "cython" not in BACKENDS, reason="compiled extension not built"
)


def _random_block(seed, npaths=17, nsteps=64):
    rng = np.random.default_rng(seed)
    incr = rng.normal(scale=0.1, size=(npaths, nsteps))
    b0 = rng.normal(size=npaths)
    g0 = np.abs(rng.normal(size=npaths))
    np.maximum(g0, -b0, out=g0)  # valid carry: X = b0 + g0 >= 0
    return incr, b0, g0


# -- cross-backend bit-identity -------------------------------------------


@needs_compiled
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_skorokhod_backends_bit_identical(seed):
    incr, b0, g0 = _random_block(seed)
    cy = BACKENDS["cython"]
    b_py, g_py = numpy_k.skorokhod_block(incr, b0, g0)
    b_cy, g_cy = cy.skorokhod_block(incr, b0, g0)
    np.testing.assert_array_equal(b_py, b_cy)
    np.testing.assert_array_equal(g_py, g_cy)


@needs_compiled
@pytest.mark.parametrize("seed", [3, 4])
def test_tally_backends_bit_identical(seed):
    rng = np.random.default_rng(seed)
    dj = np.abs(rng.normal(scale=0.02, size=(11, 48)))
    dj[rng.random(dj.shape) < 0.3] = 0.0
    cj0 = np.abs(rng.normal(scale=0.01, size=11))
    cy = BACKENDS["cython"]
    t_py, c_py = numpy_k.boundary_tally_block(dj, cj0, 5, 1e-3, 0.04)
    t_cy, c_cy = cy.boundary_tally_block(dj, cj0, 5, 1e-3, 0.04)
    np.testing.assert_array_equal(t_py, t_cy)
    np.testing.assert_array_equal(c_py, c_cy)


# -- kernel semantics --------------------------------------------------------


@pytest.mark.parametrize("kname", sorted(BACKENDS))
def test_skorokhod_reflection_invariants(kname):
    incr, b0, g0 = _random_block(11)
    b, g = BACKENDS[kname].skorokhod_block(incr, b0, g0)
    x = b + g
    assert np.all(x >= 0.0)
    assert np.all(np.diff(g, axis=1) >= 0.0)
    assert np.all(g[:, 0] >= g0)
    # the regulator only grows while the path sits at the boundary
    grow = np.diff(g, axis=1) > 0.0
    assert np.all(x[:, 1:][grow] == 0.0)


@pytest.mark.parametrize("kname", sorted(BACKENDS))
def test_skorokhod_carry_split_is_invisible(kname):
    k = BACKENDS[kname]
    incr, b0, g0 = _random_block(12, nsteps=80)
    c = np.ascontiguousarray  # kernels require C-contiguous blocks
    b_full, g_full = k.skorokhod_block(incr, b0, g0)
    b1, g1 = k.skorokhod_block(c(incr[:, :33]), b0, g0)
    b2, g2 = k.skorokhod_block(c(incr[:, 33:]), c(b1[:, -1]), c(g1[:, -1]))
    np.testing.assert_array_equal(np.hstack([b1, b2]), b_full)
    np.testing.assert_array_equal(np.hstack([g1, g2]), g_full)


def test_skorokhod_matches_scalar_loop():
    incr, b0, g0 = _random_block(13, npaths=3, nsteps=25)
    b, g = numpy_k.skorokhod_block(incr, b0, g0)
    for i in range(3):
        bb, gg = b0[i], g0[i]
        for j in range(25):
            bb = bb + incr[i, j]
            gg = max(gg, -bb)
            assert b[i, j] == bb and g[i, j] == gg


def test_tally_matches_scalar_loop():
    rng = np.random.default_rng(14)
    dj = np.abs(rng.normal(scale=0.05, size=(4, 30)))
    cj0 = np.array([0.0, 0.01, 0.2, 1.0])
    dt, t, k0 = 2e-3, 0.05, 3
    tally, cj = numpy_k.boundary_tally_block(dj, cj0, k0, dt, t)
    for i in range(4):
        acc, cum = 0.0, cj0[i]
        for j in range(30):
            k = k0 + 1 + j
            acc = acc + min(max(t - k * dt - cum, 0.0), dj[i, j])
            cum = cum + dj[i, j]
        assert tally[i] == acc and cj[i] == cum


@pytest.mark.parametrize("kname", sorted(BACKENDS))
def test_tally_carry_split_is_invisible(kname):
    k = BACKENDS[kname]
    rng = np.random.default_rng(15)
    dj = np.abs(rng.normal(scale=0.03, size=(9, 60)))
    cj0 = np.zeros(9)
    c = np.ascontiguousarray
    t_full, c_full = k.boundary_tally_block(dj, cj0, 0, 1e-3, 0.05)
    t1, c1 = k.boundary_tally_block(c(dj[:, :27]), cj0, 0, 1e-3, 0.05)
    t2, c2 = k.boundary_tally_block(c(dj[:, 27:]), c1, 27, 1e-3, 0.05)
    np.testing.assert_array_equal(t1 + t2, t_full)
    np.testing.assert_array_equal(c2, c_full)


def test_tally_bounds():
    rng = np.random.default_rng(16)
    dj = np.abs(rng.normal(scale=0.05, size=(50, 40)))
    t = 0.03
    tally, _ = numpy_k.boundary_tally_block(dj, np.zeros(50), 0, 1e-3, t)
    assert np.all(tally >= 0.0)
    assert np.all(tally <= np.minimum(dj.sum(axis=1), t) + 1e-15)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 31), cut=st.integers(1, 39), npaths=st.integers(1, 8))
def test_skorokhod_split_property(seed, cut, npaths):
    incr, b0, g0 = _random_block(seed, npaths=npaths, nsteps=40)
    b_full, g_full = numpy_k.skorokhod_block(incr, b0, g0)
    b1, g1 = numpy_k.skorokhod_block(incr[:, :cut], b0, g0)
    b2, g2 = numpy_k.skorokhod_block(incr[:, cut:], b1[:, -1], g1[:, -1])
    np.testing.assert_array_equal(np.hstack([b1, b2]), b_full)
    np.testing.assert_array_equal(np.hstack([g1, g2]), g_full)
    assert np.all(b_full + g_full >= 0.0)


# -- environment forcing -----------------------------------------------------


def _backend_in_subprocess(value):
    env = dict(os.environ)
    if value is None:
        env.pop("STICKYBM_BACKEND", None)
    else:
        env["STICKYBM_BACKEND"] = value
    return subprocess.run(
        [sys.executable, "-c", "import stickybm; print(stickybm.BACKEND)"],
        capture_output=True, text=True, env=env,
    )


def test_env_forces_numpy_backend():
    out = _backend_in_subprocess("numpy")
    assert out.returncode == 0 and out.stdout.strip() == "numpy"


@needs_compiled
def test_default_prefers_compiled():
    out = _backend_in_subprocess(None)
    assert out.returncode == 0 and out.stdout.strip() == "cython"
    forced = _backend_in_subprocess("cython")
    assert forced.returncode == 0 and forced.stdout.strip() == "cython"
