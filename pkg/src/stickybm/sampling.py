"""Random-variate generation for the time-change machinery.

One-sided stable subordinator draws (Kanter/Chambers-Mallows-Stuck),
their inverse, Mittag-Leffler holding times, and counter-based seeded
streams that make parallel Monte Carlo bit-reproducible.

Standardization: sample_stable(alpha, t) has symbol
E exp(-lam * H_t) = exp(-t * lam**alpha); alpha = 1 degenerates to
H_t = t and consumes no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

__all__ = [
    "RngStream",
    "sample_stable",
    "sample_mittag_leffler",
    "sample_inverse_stable",
    "sample_subordinator_over_increments",
    "stable_batch",
    "inverse_stable_crossing_levels",
]

_TINY = 1e-300


@dataclass
class RngStream:
    """Counter-based stream: (master_seed, stream_index, counter) pins a draw.

    All randomness flows through 64-bit Philox words consumed one per
    uniform double; normals are produced by Box-Muller from uniforms so
    the word count stays exact (ziggurat consumption is data-dependent).
    Distinct stream indices spawn statistically independent sequences.
    """

    master_seed: int
    stream_index: int = 0
    counter: int = 0
    _gen: Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        bits = Philox(SeedSequence(self.master_seed, spawn_key=(self.stream_index,)))
        if self.counter:
            bits.advance(self.counter // 4)  # Philox counter steps 4 words at a time
        self._gen = Generator(bits)
        if self.counter % 4:
            self._gen.random(self.counter % 4)

    def spawn(self, stream_index: int) -> "RngStream":
        return RngStream(self.master_seed, stream_index)

    def uniforms(self, n: int) -> np.ndarray:
        self.counter += int(n)
        return self._gen.random(n)

    def exponentials(self, n: int, rate: float = 1.0) -> np.ndarray:
        # -log(1-U): finite and >= 0 for U in [0,1)
        return -np.log1p(-self.uniforms(n)) / rate

    def normals(self, n: int) -> np.ndarray:
        """Standard normals via Box-Muller; consumes 2*ceil(n/2) words."""
        m = (int(n) + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log1p(-u1))
        ang = 2.0 * math.pi * u2
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(ang)
        out[1::2] = r * np.sin(ang)
        return out[: int(n)]


def _kanter(alpha: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Standard one-sided stable from U ~ Unif(0,1), W ~ Exp(1):

        S = sin(a pi U) sin((1-a) pi U)^{(1-a)/a} / sin(pi U)^{1/a} * W^{-(1-a)/a}
    """
    rho = (1.0 - alpha) / alpha
    piu = math.pi * u
    s = (
        np.sin(alpha * piu)
        * np.sin((1.0 - alpha) * piu) ** rho
        / np.sin(piu) ** (1.0 / alpha)
    )
    return s * np.maximum(w, _TINY) ** (-rho)


def stable_batch(alpha: float, dts: np.ndarray, rng: RngStream) -> np.ndarray:
    """Independent draws of H_{dt} for each dt in `dts` (flat, in order).

    Zero dts produce zero without consuming randomness; alpha = 1 returns
    dts exactly with no draws.
    """
    dts = np.asarray(dts, dtype=float)
    if np.any(dts < 0):
        raise ValueError("time increments must be >= 0")
    if alpha == 1.0:
        return dts.copy()
    out = np.zeros_like(dts)
    pos = dts > 0
    n = int(np.count_nonzero(pos))
    if n:
        u = rng.uniforms(n)
        w = -np.log1p(-rng.uniforms(n))
        out[pos] = dts[pos] ** (1.0 / alpha) * _kanter(alpha, u, w)
    return out


def sample_stable(alpha: float, t: float, rng: RngStream) -> float:
    """One draw of the subordinator H_t, E e^{-lam H_t} = e^{-t lam^alpha}."""
    _check_order(alpha, closed_right=True)
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if alpha == 1.0:
        return float(t)
    return float(stable_batch(alpha, np.array([t]), rng)[0])


def sample_mittag_leffler(alpha: float, q: float, rng: RngStream,
                          n: int | None = None):
    """Holding-time draw with survival P(. > t) = E_alpha(-q t^alpha).

    Generated as H evaluated at an independent exponential(q) level:
    chi^{1/alpha} * S.  alpha = 1 reduces to the exponential itself.
    Scalar by default; with ``n`` set, returns an array of ``n`` draws
    (one exponential batch, then one stable batch -- a different word
    order than ``n`` scalar calls).
    """
    _check_order(alpha, closed_right=True)
    if q <= 0:
        raise ValueError(f"q must be > 0, got {q}")
    chi = rng.exponentials(1 if n is None else n, rate=q)
    if alpha == 1.0:
        out = chi
    else:
        out = stable_batch(alpha, chi, rng)
    return float(out[0]) if n is None else out


def sample_inverse_stable(alpha: float, t: float, rng: RngStream) -> float:
    """One draw of the inverse subordinator L_t = inf{s : H_s > t}.

    Uses the exact ratio representation L_t =law (t / S)^alpha with S a
    standard stable draw; O(1) instead of path bisection.
    """
    _check_order(alpha, closed_right=False)
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    u = rng.uniforms(1)
    w = -np.log1p(-rng.uniforms(1))
    s = _kanter(alpha, u, w)[0]
    return float((t / max(s, _TINY)) ** alpha)


def sample_subordinator_over_increments(
    alpha: float, increments: np.ndarray, rng: RngStream
) -> np.ndarray:
    """H along a nondecreasing grid starting at 0: cumulative sums of
    independent stable draws, one per positive increment.

    Returns the cumulative H values aligned with the input grid.
    """
    _check_order(alpha, closed_right=True)
    grid = np.asarray(increments, dtype=float)
    if grid.size == 0:
        return grid.copy()
    if grid[0] != 0.0:
        raise ValueError("grid must start at 0")
    steps = np.diff(grid)
    if np.any(steps < 0):
        raise ValueError("grid must be nondecreasing")
    if alpha == 1.0:
        return grid.copy()
    out = np.empty_like(grid)
    out[0] = 0.0
    np.cumsum(stable_batch(alpha, steps, rng), out=out[1:])
    return out


def inverse_stable_crossing_levels(
    alpha: float, thresholds: np.ndarray, dl: float, rng: RngStream, max_level: float = np.inf
) -> np.ndarray:
    """Path-based inverse draws: walk one H path on a level grid of pitch
    dl and record the first level where H exceeds each threshold.

    All thresholds are resolved on the *same* path, so outputs inherit
    the monotone coupling of the inverse process.  Discretization biases
    levels upward by at most dl.
    """
    _check_order(alpha, closed_right=False)
    thr = np.sort(np.asarray(thresholds, dtype=float))
    if np.any(thr <= 0):
        raise ValueError("thresholds must be > 0")
    out = np.full(thr.shape, np.nan)
    h = 0.0
    level = 0.0
    i = 0
    block = 4096
    while i < thr.size and level < max_level:
        draws = stable_batch(alpha, np.full(block, dl), rng)
        for d in draws:
            level += dl
            h += d
            while i < thr.size and h > thr[i]:
                out[i] = level
                i += 1
            if i >= thr.size or level >= max_level:
                break
    return out


def _check_order(alpha: float, closed_right: bool) -> None:
    hi_ok = alpha <= 1.0 if closed_right else alpha < 1.0
    if not (0.0 < alpha and hi_ok):
        rng_txt = "(0, 1]" if closed_right else "(0, 1)"
        raise ValueError(f"alpha must lie in {rng_txt}, got {alpha}")
