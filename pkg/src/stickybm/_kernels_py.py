"""Pure-numpy block kernels (fallback backend).

Each function has a compiled twin in `_kernels.pyx`; both must produce
bit-identical outputs.  That holds because every accumulation here is a
sequential left-to-right fold seeded with the carry (the carry is
prepended as a column before np.cumsum, so the rounding sequence equals
the compiled loop's), and the remaining ops (max, clip, compare) are
exact in floating point.

Block convention: `incr` has shape (npaths, nsteps), C-contiguous;
carry arrays have shape (npaths,) and are NOT modified — updated
carries are returned.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _seeded_cumsum(carry: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Row cumsum folding left from `carry`: out[:, j] = ((carry + b0) + b1)...

    Rounds identically to a scalar loop seeded with carry.
    """
    z = np.empty((block.shape[0], block.shape[1] + 1))
    z[:, 0] = carry
    z[:, 1:] = block
    return np.cumsum(z, axis=1)


def skorokhod_block(incr: np.ndarray, b0: np.ndarray, g0: np.ndarray):
    """Reflect one block: B_k = b0 + sum of increments, G_k = running
    max(g0, -B) (regulator), X = B + G >= 0.

    Returns (B, G) for the whole block; carries are B[:, -1], G[:, -1].
    """
    b = _seeded_cumsum(b0, incr)[:, 1:]
    g = np.maximum.accumulate(-b, axis=1)
    np.maximum(g, g0[:, None], out=g)
    return b, g


def boundary_tally_block(
    dj: np.ndarray, cj0: np.ndarray, k0: int, dt: float, t: float
):
    """Plateau mass of the inverse clock before outer time t, one block.

    Step k (global, 1-based) contributes clip(t - k*dt - cjprev, 0, dJ_k)
    where cjprev is the jump mass strictly before step k.  Returns
    (tally, cj_end): per-path sequential sums of contributions and the
    updated cumulative jump mass.
    """
    cj_full = _seeded_cumsum(cj0, dj)
    cjprev = cj_full[:, :-1]
    k = k0 + 1 + np.arange(dj.shape[1])
    contrib = np.clip(t - k * dt - cjprev, 0.0, dj)
    tally = _seeded_cumsum(np.zeros(dj.shape[0]), contrib)[:, -1]
    return tally, cj_full[:, -1].copy()
