"""Reflected paths, boundary clocks, and the Monte Carlo engines built on them.

The driving motion has generator d^2/dx^2, so Gaussian increments over a
step ``dt`` have standard deviation ``sqrt(2*dt)``.  Paths are advanced on a
uniform inner grid by the Skorokhod map: ``X = x + W + gamma`` with the
regulator ``gamma`` increasing only where ``X`` sits at 0.

The boundary clock adds one jump per inner step on top of the elapsed time:
step ``k`` first accrues ``dt`` of running time and then jumps by

    J_k = (eta/sigma)^(1/alpha) * (H(gamma_k) - H(gamma_{k-1})),

a stable increment over that step's regulator growth (for ``alpha = 1`` the
subordinator is the identity and the clock is the classic sticky one to the
last bit, drawing nothing).  Inverting the clock yields the time-changed
state: outer times falling inside a jump ("plateau") map to state exactly 0;
other outer times read the state from the inner grid point on the left,
which carries an O(sqrt(dt)) state bias documented per engine.  The total
plateau length below ``t`` is the boundary occupation up to ``t``.

Word-order policy: each sampler documents its exact draw order, so a
``(master_seed, stream_index)`` pair fully determines its output.  Batch
engines split work into fixed-size path chunks, give chunk ``i`` the stream
with index ``i``, and reduce chunk results in index order; results are then
independent of the worker count used to execute the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .estimators import McEstimate, mc_estimate
from .params import InitialDatum, ModelParams
from .sampling import RngStream, stable_batch

__all__ = [
    "Path",
    "TimeChange",
    "InvertedClock",
    "WeightedSample",
    "simulate_reflected_bm",
    "build_time_change",
    "invert_time_change",
    "simulate_xbar",
    "path_statistics",
    "sample_lifetime_direct",
    "fivp_evaluate",
    "check_clock_duality",
    "DualityReport",
    "exit_time_mc",
    "occupation_mc",
    "xbar_state_mc",
    "lifetime_path_mc",
]

# Chunk geometry for the batch engines.  A block of 1024 paths x 2048 steps
# keeps each working array at 16 MiB; engines stream blocks, compacting
# finished paths away where the horizon is random.
_CHUNK_PATHS = 1024
_BLOCK_STEPS = 2048


# ---------------------------------------------------------------------------
# Path-level types


@dataclass(frozen=True)
class Path:
    """A reflected path on a uniform grid together with its regulator.

    ``driving`` is the unreflected path from ``start`` (the running sum of
    the Gaussian increments, seeded with the start), so the Skorokhod
    identity ``values == driving + regulator`` holds bitwise; ``values >=
    0`` and the regulator is nondecreasing from 0, increasing only at steps
    whose endpoint sits at 0.
    """

    grid: np.ndarray
    values: np.ndarray
    regulator: np.ndarray
    driving: np.ndarray
    start: float
    dt: float

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape or self.regulator.shape != self.grid.shape:
            raise ValueError("grid, values, and regulator must share one shape")
        if self.start < 0.0:
            raise ValueError("start must be nonnegative")

    @property
    def steps(self) -> int:
        return self.grid.size - 1


@dataclass(frozen=True)
class TimeChange:
    """A boundary clock over a path's grid.

    ``clock_values[k]`` is the clock after ``k`` full steps (time accrual
    plus jump); ``clock_values[0] = 0`` and increments are ``dt + jump >=
    dt`` up to accumulation round-off, so the clock dominates the identity.
    ``jump_times``/``jump_sizes`` record the positive jumps exactly (inner
    time of the jump, jump length).
    """

    base_grid: np.ndarray
    clock_values: np.ndarray
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    dt: float
    mode: str

    def __post_init__(self) -> None:
        if self.clock_values.shape != self.base_grid.shape:
            raise ValueError("clock must be defined on the base grid")
        if self.clock_values[0] != 0.0:
            raise ValueError("clock starts at 0")

    @property
    def jumps(self) -> np.ndarray:
        """Per-step jump sizes on the full grid (zeros where no jump)."""
        out = np.diff(self.clock_values) - self.dt
        # guard tiny negative round-off from the subtraction
        return np.maximum(out, 0.0)

    @property
    def horizon(self) -> float:
        return float(self.clock_values[-1])


@dataclass(frozen=True)
class InvertedClock:
    """Right-continuous inverse of a :class:`TimeChange` on an outer grid.

    ``values[j]`` is the inner time inf{s : clock(s) > grid[j]};
    ``indices[j]`` is the inner grid index to read state from (the plateau
    endpoint when ``on_plateau[j]``, else the left inner grid point).
    Plateau levels/lengths reconstruct the clock jumps exactly.
    """

    grid: np.ndarray
    values: np.ndarray
    indices: np.ndarray
    on_plateau: np.ndarray
    plateau_levels: np.ndarray
    plateau_lengths: np.ndarray


@dataclass(frozen=True)
class WeightedSample:
    """A time-changed state with its boundary-functional weight.

    ``weight`` is the elastic discount exp(-(c/sigma) * local time) in
    weight mode and 1.0 in kill mode; ``alive`` is False only in kill mode
    once the local time has crossed the exponential threshold.
    """

    value: float
    weight: float
    alive: bool

    def __post_init__(self) -> None:
        if not (0.0 <= self.weight <= 1.0):
            raise ValueError("weight must lie in [0, 1]")
        if self.alive and self.value < 0.0:
            raise ValueError("states are nonnegative")


# ---------------------------------------------------------------------------
# Single-path operations


def simulate_reflected_bm(x: float, horizon: float, dt: float, rng: RngStream) -> Path:
    """Simulate a reflected path from ``x`` on the grid ``0, dt, ..., K*dt``.

    ``K = ceil(horizon/dt)`` (the grid covers the horizon).  Draw order:
    Gaussian increments for steps ``1..K`` in one batch.  The regulator is
    the running maximum of the negated driving path clipped below at 0, so
    ``values == driving + regulator`` is exact in floating point.
    """
    if x < 0.0:
        raise ValueError("start must be nonnegative")
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("horizon and dt must be positive")
    steps = int(math.ceil(horizon / dt - 1e-12))
    incr = rng.normals(steps) * math.sqrt(2.0 * dt)
    b, g = kernels.skorokhod_block(incr.reshape(1, steps),
                                   np.array([x]), np.array([0.0]))
    grid = np.arange(steps + 1, dtype=float) * dt
    values = np.empty(steps + 1)
    regulator = np.empty(steps + 1)
    driving = np.empty(steps + 1)
    values[0], regulator[0], driving[0] = x, 0.0, x
    regulator[1:] = g[0]
    driving[1:] = b[0]
    values[1:] = b[0] + g[0]
    return Path(grid=grid, values=values, regulator=regulator,
                driving=driving, start=x, dt=dt)


def build_time_change(path: Path, params: ModelParams, mode: str = "fractional",
                      rng: RngStream | None = None) -> TimeChange:
    """Build the boundary clock of ``path`` under ``params``.

    ``mode="classic"`` uses the sticky clock ``t + (eta/sigma) * gamma``
    (jump per step proportional to the regulator increment; no draws).
    ``mode="fractional"`` drives the jumps by a stable subordinator over the
    regulator increments, scaled by ``(eta/sigma)^(1/alpha)``; draw order is
    one (uniform, exponential) pair per step with positive regulator
    increment, in step order.  ``alpha=1`` makes the fractional clock equal
    to the classic one without consuming randomness, and ``eta=0`` yields
    the identity clock in either mode.
    """
    if mode not in ("classic", "fractional"):
        raise ValueError("mode must be 'classic' or 'fractional'")
    dgam = np.diff(path.regulator)
    ratio = params.stickiness_ratio
    if ratio == 0.0:
        jumps = np.zeros_like(dgam)
    elif mode == "classic":
        jumps = ratio * dgam
    else:
        if params.alpha == 1.0:
            jumps = ratio * dgam
        else:
            if rng is None:
                raise ValueError("fractional mode with alpha < 1 needs an RngStream")
            jumps = ratio ** (1.0 / params.alpha) * stable_batch(params.alpha, dgam, rng)
    clock = np.empty(path.grid.size)
    clock[0] = 0.0
    np.cumsum(path.dt + jumps, out=clock[1:])
    pos = np.nonzero(jumps > 0.0)[0]
    return TimeChange(base_grid=path.grid, clock_values=clock,
                      jump_times=path.grid[pos + 1], jump_sizes=jumps[pos],
                      dt=path.dt, mode=mode)


def invert_time_change(tc: TimeChange, output_grid: np.ndarray) -> InvertedClock:
    """Right-continuous inverse of the clock on ``output_grid``.

    For an outer time ``t`` in step ``k``'s accrual span the inverse moves
    at unit speed; in step ``k``'s jump span the inverse sits at the inner
    grid point ``k*dt`` (a plateau of exactly the jump's length).  Outer
    times beyond the clock's range raise, reporting the truncation point;
    the right endpoint itself maps to the last inner grid point.
    """
    t = np.asarray(output_grid, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("outer times must be nonnegative")
    cmax = tc.horizon
    if np.any(t > cmax):
        raise ValueError(
            f"output grid exceeds the clock range (truncation at {cmax:g}; "
            f"extend the inner horizon)")
    clock = tc.clock_values
    # kprev = number of full steps completed strictly before t lands
    kprev = np.searchsorted(clock, t, side="right") - 1
    kprev = np.minimum(kprev, clock.size - 2)
    offset = t - clock[kprev]
    past_accrual = offset >= tc.dt
    # past the accrual span, t sits in the step's jump; claim a plateau (an
    # exact boundary visit) only when the jump has positive length — the
    # degenerate case is the clock-range right edge, which just snaps to
    # the last inner grid point
    plateau = past_accrual & (tc.jumps[kprev] > 0.0)
    values = np.where(past_accrual, tc.base_grid[kprev + 1], tc.base_grid[kprev] + offset)
    indices = np.where(past_accrual, kprev + 1, kprev)
    return InvertedClock(grid=t, values=values, indices=indices.astype(np.int64),
                         on_plateau=plateau, plateau_levels=tc.jump_times,
                         plateau_lengths=tc.jump_sizes)


def _boundary_occupation_exact(tc: TimeChange, t: float) -> float:
    """Lebesgue measure of plateaus below ``t``: sum_k clip(t - jump start, 0, J_k)."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t > tc.horizon:
        raise ValueError("time exceeds the clock range")
    ends = tc.clock_values[np.searchsorted(tc.base_grid, tc.jump_times)]
    starts = ends - tc.jump_sizes
    return float(np.sum(np.clip(t - starts, 0.0, tc.jump_sizes)))


def simulate_xbar(x: float, params: ModelParams, horizon: float, dt: float,
                  rng: RngStream, kill_mode: str = "weight") -> tuple[np.ndarray, list[WeightedSample]]:
    """Simulate one time-changed path observed on the outer grid.

    Returns ``(grid, samples)`` with ``grid = 0, dt, ..., horizon`` and one
    :class:`WeightedSample` per grid point.  Draw order: in kill mode one
    exponential threshold first; then the reflected path's increments; then
    the clock jumps.  Weight mode carries ``exp(-(c/sigma) * gamma)`` at the
    inverse inner time; kill mode keeps weight 1 and clears ``alive`` once
    the regulator crosses the threshold (dead states report value 0).
    """
    if kill_mode not in ("weight", "kill"):
        raise ValueError("kill_mode must be 'weight' or 'kill'")
    chi = math.inf
    if kill_mode == "kill":
        if params.c <= 0.0:
            raise ValueError("kill mode needs c > 0")
        chi = float(rng.exponentials(1, rate=params.kill_ratio)[0])
    path = simulate_reflected_bm(x, horizon, dt, rng)
    tc = build_time_change(path, params, "fractional", rng)
    grid = path.grid[path.grid <= horizon + 1e-12 * max(1.0, horizon)]
    inv = invert_time_change(tc, grid)
    states = np.where(inv.on_plateau, 0.0, path.values[inv.indices])
    gammas = path.regulator[inv.indices]
    samples: list[WeightedSample] = []
    for s, g in zip(states, gammas):
        if kill_mode == "weight":
            samples.append(WeightedSample(float(s), math.exp(-params.kill_ratio * g), True))
        else:
            alive = g < chi
            samples.append(WeightedSample(float(s) if alive else 0.0, 1.0, bool(alive)))
    return grid, samples


def path_statistics(path: Path | None = None, time_change: TimeChange | None = None,
                    samples: list[WeightedSample] | None = None, *,
                    query: str, t: float | None = None,
                    interval: tuple[float, float] | None = None,
                    grid: np.ndarray | None = None) -> float:
    """Single-path statistics of the time-changed process.

    ``query`` is one of:

    * ``"boundary_occupation"`` — plateau mass of the clock below ``t``
      (exact given the clock; needs ``time_change`` and ``t``),
    * ``"interior_occupation"`` — its complement ``t - boundary``,
    * ``"first_exit"`` — first outer time the state leaves ``interval``
      (scans the time-changed path; needs ``path``, ``time_change`` and
      ``interval``; ``inf`` if there is no exit within the horizon),
    * ``"lifetime"`` — first outer grid time a kill-mode sample sequence is
      no longer alive (needs ``samples`` and ``grid``; ``inf`` if alive
      throughout).
    """
    if query in ("boundary_occupation", "interior_occupation"):
        if time_change is None or t is None:
            raise ValueError(f"{query} needs time_change and t")
        occ = _boundary_occupation_exact(time_change, t)
        return occ if query == "boundary_occupation" else t - occ
    if query == "first_exit":
        if path is None or time_change is None or interval is None:
            raise ValueError("first_exit needs path, time_change, and interval")
        lo, hi = interval
        if not lo < hi:
            raise ValueError("interval must satisfy lo < hi")
        outside = (path.values >= hi) | (path.values < lo)
        outside[0] = False  # the start never counts as an exit
        hits = np.nonzero(outside)[0]
        if hits.size == 0:
            return math.inf
        return float(time_change.clock_values[hits[0]])
    if query == "lifetime":
        if samples is None or grid is None:
            raise ValueError("lifetime needs kill-mode samples and their grid")
        for tj, s in zip(grid, samples):
            if not s.alive:
                return float(tj)
        return math.inf
    raise ValueError(f"unknown query {query!r}")


# ---------------------------------------------------------------------------
# Direct samplers (no grid)


def sample_lifetime_direct(x: float, params: ModelParams, rng: RngStream,
                           n: int = 1, inner_cap: float | None = None) -> np.ndarray:
    """Exact-law lifetimes of the killed time-changed process started at ``x``.

    Decomposition: (time to reach 0) + (inverse local time at the
    exponential threshold) + (the threshold's clock jumps), i.e.

        zeta = H^{1/2}(x) + H^{1/2}(chi) + (eta/sigma)^(1/alpha) H^alpha(chi)

    with one shared ``chi ~ Exp(c/sigma)`` indexing both chi-driven
    subordinators and all subordinators independent.  Requires ``c > 0``.
    Draw order: the ``chi`` batch; the ``H^{1/2}(x)`` batch (skipped when
    ``x = 0``); the ``H^{1/2}(chi)`` batch; the ``H^alpha(chi)`` batch
    (skipped when ``eta = 0`` or ``alpha = 1``; the ``alpha = 1`` jump part
    is ``(eta/sigma) * chi`` exactly).  The law has infinite mean for every
    parameter choice (hitting-time tail), so summarise through survival
    probabilities or quantiles.

    ``inner_cap`` censors like the path engine does: when the inner part
    H^{1/2}(x) + H^{1/2}(chi) exceeds the cap the lifetime becomes +inf.
    Draws are identical with and without the cap.
    """
    if params.c <= 0.0:
        raise ValueError("lifetimes need c > 0 (no killing otherwise)")
    if x < 0.0:
        raise ValueError("start must be nonnegative")
    chi = rng.exponentials(n, rate=params.kill_ratio)
    inner = np.zeros(n)
    if x > 0.0:
        inner += stable_batch(0.5, np.full(n, x), rng)
    inner += stable_batch(0.5, chi, rng)
    zeta = inner.copy()
    ratio = params.stickiness_ratio
    if ratio > 0.0:
        if params.alpha == 1.0:
            zeta += ratio * chi
        else:
            zeta += ratio ** (1.0 / params.alpha) * stable_batch(params.alpha, chi, rng)
    if inner_cap is not None:
        zeta[inner > inner_cap] = np.inf
    return zeta


@dataclass(frozen=True)
class DualityReport:
    """Two-sided agreement check for the clock-duality identities.

    ``lhs`` holds P(clock_t >= s) for the scaled (item ii) and unscaled
    (item iii) clock constructions; ``rhs`` holds P(first passage of the
    jump part through s - t <= t), the shared dual representation.  Both
    sides are sampled from exact laws (no discretization), so the check
    carries no bias budget.
    """

    t: float
    s: float
    alpha: float
    n: int
    lhs_scaled: McEstimate
    lhs_unscaled: McEstimate
    rhs: McEstimate
    k: float = 3.0
    z_scaled: float = field(init=False)
    z_unscaled: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        def z(a: McEstimate, b: McEstimate) -> float:
            se = math.hypot(a.stderr, b.stderr)
            return abs(a.mean - b.mean) / se if se > 0.0 else 0.0
        object.__setattr__(self, "z_scaled", z(self.lhs_scaled, self.rhs))
        object.__setattr__(self, "z_unscaled", z(self.lhs_unscaled, self.rhs))
        object.__setattr__(self, "passed",
                           self.z_scaled <= self.k and self.z_unscaled <= self.k)

    def summary(self) -> str:
        return (f"duality t={self.t:g} s={self.s:g} alpha={self.alpha:g} n={self.n}: "
                f"scaled {self.lhs_scaled.mean:.5f} / unscaled {self.lhs_unscaled.mean:.5f} "
                f"vs dual {self.rhs.mean:.5f} "
                f"(z={self.z_scaled:.2f}, {self.z_unscaled:.2f}) "
                f"{'PASS' if self.passed else 'FAIL'}")


def check_clock_duality(params: ModelParams, t: float, s: float, n: int,
                        master_seed: int, k: float = 3.0) -> DualityReport:
    """Monte Carlo check of the boundary-clock duality at ``(t, s)``.

    Both identities state that the clock started at 0 has crossed level
    ``s`` by time ``t`` exactly when the first passage of its jump part
    through ``s - t`` happens before ``t``:

    * scaled clock ``t + (eta/sigma)^(1/alpha) H(gamma_t)``,
    * unscaled clock ``t + H((eta/sigma) gamma_t)``,
    * dual first passage ``inverse-gamma((sigma/eta) L_{s-t})``.

    Every ingredient has an exact sampler — ``gamma_t`` is ``|N(0, 2t)|``,
    ``L_u = (u/S)^alpha``, and the inverse regulator at level ``w`` is
    ``w^2``-scaled 1/2-stable — so no discretization enters and the two
    sides are compared at combined ``k`` stderr with no bias allowance.
    Streams 0/1/2 of ``master_seed`` drive the scaled, unscaled, and dual
    samplers respectively.
    """
    if params.eta <= 0.0:
        raise ValueError("the duality needs eta > 0 (jump part present)")
    if n < 2:
        raise ValueError("need at least two samples")
    ratio = params.stickiness_ratio
    alpha = params.alpha

    if s <= t:
        # the clock dominates the identity, so both sides are exactly 1
        one = McEstimate(1.0, 0.0, n, master_seed)
        return DualityReport(t=t, s=s, alpha=alpha, n=n, lhs_scaled=one,
                             lhs_unscaled=one, rhs=one, k=k)

    rng_scaled = RngStream(master_seed, 0)
    gam = np.abs(rng_scaled.normals(n)) * math.sqrt(2.0 * t)
    extra = ratio ** (1.0 / alpha) * stable_batch(alpha, gam, rng_scaled)
    lhs_scaled = mc_estimate((t + extra >= s).astype(float), (master_seed, 0))

    rng_unscaled = RngStream(master_seed, 1)
    gam = np.abs(rng_unscaled.normals(n)) * math.sqrt(2.0 * t)
    extra = stable_batch(alpha, ratio * gam, rng_unscaled)
    lhs_unscaled = mc_estimate((t + extra >= s).astype(float), (master_seed, 1))

    rng_dual = RngStream(master_seed, 2)
    u = np.full(n, s - t)
    inv_sub = (u / stable_batch(alpha, np.ones(n), rng_dual)) ** alpha
    passage = stable_batch(0.5, inv_sub / ratio, rng_dual)
    rhs = mc_estimate((passage <= t).astype(float), (master_seed, 2))

    return DualityReport(t=t, s=s, alpha=alpha, n=n, lhs_scaled=lhs_scaled,
                         lhs_unscaled=lhs_unscaled, rhs=rhs, k=k)


# ---------------------------------------------------------------------------
# Batch engines: chunked, stream-indexed, worker-count independent


def _run_chunks(n: int, worker, threads: int = 1, chunk_paths: int = _CHUNK_PATHS):
    """Run ``worker(chunk_index, chunk_size)`` over ``n`` paths in chunks.

    Chunk ``i`` covers paths ``[i*chunk_paths, ...)`` and must seed its own
    stream from its index; results are collected and reduced in index
    order, so the output is identical for any ``threads``.
    """
    if n <= 0:
        raise ValueError("need a positive sample count")
    sizes = [min(chunk_paths, n - i * chunk_paths)
             for i in range((n + chunk_paths - 1) // chunk_paths)]
    if threads <= 1:
        return [worker(i, m) for i, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, i, m) for i, m in enumerate(sizes)]
        return [f.result() for f in futures]


def exit_time_mc(x: float, eps: float, dt: float, n: int, master_seed: int,
                 threads: int = 1, horizon_cap: float = 100.0,
                 block_steps: int = _BLOCK_STEPS) -> dict:
    """First exit of the reflected path from ``[0, eps)`` for ``n`` paths.

    Exit is detected at the first inner grid point with state >= ``eps``
    (no bridge correction), so exit times carry an O(sqrt(dt)) upward bias
    and regulator values the matching boundary-layer bias; budgets are the
    caller's to declare.  Returns per-path arrays ``tau`` (exit time),
    ``gamma`` (regulator at exit), and the count of paths censored at
    ``horizon_cap`` (their entries hold the cap / last regulator value).

    Per chunk, draw order is Gaussian blocks for currently-alive paths in
    row order; chunk ``i`` uses stream index ``i``.
    """
    if not 0.0 <= x < eps:
        raise ValueError("need 0 <= x < eps")
    max_steps = int(math.ceil(horizon_cap / dt))

    def worker(chunk_index: int, m: int):
        rng = RngStream(master_seed, chunk_index)
        scale = math.sqrt(2.0 * dt)
        tau = np.full(m, horizon_cap)
        gam_out = np.zeros(m)
        censored = np.ones(m, dtype=bool)
        rows = np.arange(m)          # original row of each still-alive path
        b = np.full(m, float(x))
        g = np.zeros(m)
        done_steps = 0
        while rows.size and done_steps < max_steps:
            bs = min(block_steps, max_steps - done_steps)
            incr = rng.normals(rows.size * bs).reshape(rows.size, bs) * scale
            bb, gg = kernels.skorokhod_block(incr, b, g)
            hit = (bb + gg) >= eps
            any_hit = hit.any(axis=1)
            if any_hit.any():
                first = np.argmax(hit[any_hit], axis=1)
                orig = rows[any_hit]
                tau[orig] = (done_steps + first + 1) * dt
                gam_out[orig] = gg[any_hit, first]
                censored[orig] = False
            keep = ~any_hit
            rows = rows[keep]
            b = bb[keep, -1].copy()
            g = gg[keep, -1].copy()
            done_steps += bs
        if rows.size:
            gam_out[rows] = g
        return tau, gam_out, int(np.count_nonzero(censored))

    parts = _run_chunks(n, worker, threads)
    tau = np.concatenate([p[0] for p in parts])
    gamma = np.concatenate([p[1] for p in parts])
    return {"tau": tau, "gamma": gamma,
            "censored": sum(p[2] for p in parts), "dt": dt, "n": n}


def _clock_jump_block(dgam: np.ndarray, params: ModelParams,
                      rng: RngStream) -> np.ndarray:
    """Per-step clock jumps over regulator increments, row-major draw order."""
    ratio = params.stickiness_ratio
    if ratio == 0.0:
        return np.zeros_like(dgam)
    if params.alpha == 1.0:
        return ratio * dgam
    flat = stable_batch(params.alpha, dgam.ravel(), rng)
    return ratio ** (1.0 / params.alpha) * flat.reshape(dgam.shape)


def occupation_mc(params: ModelParams, t: float, dt: float, n: int,
                  master_seed: int, x: float = 0.0, threads: int = 1,
                  block_steps: int = _BLOCK_STEPS) -> dict:
    """Boundary/interior occupation of the time-changed process up to ``t``.

    The boundary occupation is the exact plateau mass of the simulated
    clock below ``t`` (kernel tally); the interior occupation is its exact
    complement ``t - boundary``.  ``ceil(t/dt)`` inner steps always cover
    the outer horizon because the clock dominates the identity.  The only
    statistical bias is the regulator's grid deficit (missed excursions),
    which pushes boundary mass down by O(sqrt(dt)); declare the budget at
    the comparison site.

    Per chunk, draw order alternates per block: Gaussian increments, then
    one stable pair per positive regulator increment in row-major order.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    total_steps = int(math.ceil(t / dt - 1e-12))

    def worker(chunk_index: int, m: int):
        rng = RngStream(master_seed, chunk_index)
        scale = math.sqrt(2.0 * dt)
        b = np.full(m, float(x))
        g = np.zeros(m)
        cj = np.zeros(m)
        tally = np.zeros(m)
        done = 0
        while done < total_steps:
            bs = min(block_steps, total_steps - done)
            incr = rng.normals(m * bs).reshape(m, bs) * scale
            bb, gg = kernels.skorokhod_block(incr, b, g)
            dgam = np.empty_like(gg)
            dgam[:, 0] = gg[:, 0] - g
            dgam[:, 1:] = gg[:, 1:] - gg[:, :-1]
            dj = _clock_jump_block(dgam, params, rng)
            part, cj = kernels.boundary_tally_block(dj, cj, done, dt, t)
            tally += part
            b = bb[:, -1].copy()
            g = gg[:, -1].copy()
            done += bs
        return tally

    parts = _run_chunks(n, worker, threads)
    boundary = np.concatenate(parts)
    return {"boundary": boundary, "interior": t - boundary, "dt": dt, "n": n}


def xbar_state_mc(x: float, params: ModelParams, t, dt: float, n: int,
                  master_seed: int, f: InitialDatum | None = None,
                  kill_mode: str = "weight", threads: int = 1,
                  block_steps: int = _BLOCK_STEPS) -> dict:
    """Weighted state functional ``f(Xbar_t) * weight_t`` for ``n`` paths.

    ``t`` may be a scalar or a per-path array (the latter drives the
    fractional-initial-value evaluation, where each path carries its own
    random horizon).  The state at an outer time inside a clock jump is 0
    exactly; otherwise it is the inner state one grid point to the left
    (O(sqrt(dt)) state bias).  Weight mode multiplies by
    ``exp(-(c/sigma) gamma)``; kill mode draws one exponential threshold
    per path first and reports the alive indicator instead.

    Per chunk, draw order: kill thresholds (kill mode only), then per
    block Gaussian increments followed by row-major stable pairs.
    """
    if kill_mode not in ("weight", "kill"):
        raise ValueError("kill_mode must be 'weight' or 'kill'")
    if kill_mode == "kill" and params.c <= 0.0:
        raise ValueError("kill mode needs c > 0")
    t_arr = np.asarray(t, dtype=float)
    per_path = t_arr.ndim == 1
    if per_path and t_arr.size != n:
        raise ValueError("per-path horizons need len(t) == n")
    if np.any(t_arr <= 0.0):
        raise ValueError("t must be positive")

    def worker(chunk_index: int, m: int):
        rng = RngStream(master_seed, chunk_index)
        if per_path:
            tvec = t_arr[chunk_index * _CHUNK_PATHS:
                         chunk_index * _CHUNK_PATHS + m]
        else:
            tvec = np.full(m, float(t_arr))
        chi = (rng.exponentials(m, rate=params.kill_ratio)
               if kill_mode == "kill" else None)
        max_steps = int(math.ceil(np.max(tvec) / dt - 1e-12))
        scale = math.sqrt(2.0 * dt)
        state = np.zeros(m)
        gam_at = np.zeros(m)
        rows = np.arange(m)
        b = np.full(m, float(x))
        g = np.zeros(m)
        cj = np.zeros(m)
        x_prev = np.full(m, float(x))   # inner state at the last completed step
        g_prev = np.zeros(m)
        done = 0
        while rows.size and done < max_steps:
            bs = min(block_steps, max_steps - done)
            incr = rng.normals(rows.size * bs).reshape(rows.size, bs) * scale
            bb, gg = kernels.skorokhod_block(incr, b, g)
            xx = bb + gg
            dgam = np.empty_like(gg)
            dgam[:, 0] = gg[:, 0] - g
            dgam[:, 1:] = gg[:, 1:] - gg[:, :-1]
            dj = _clock_jump_block(dgam, params, rng)
            # clock after each step of the block
            cfull = cj[:, None] + np.cumsum(dj, axis=1) \
                + (done + 1 + np.arange(bs)) * dt
            tcol = tvec[rows][:, None]
            crossed = cfull > tcol
            any_cross = crossed.any(axis=1)
            if any_cross.any():
                rsel = np.nonzero(any_cross)[0]
                first = np.argmax(crossed[rsel], axis=1)
                orig = rows[rsel]
                # clock at the crossing step's accrual end, before its jump;
                # t at or past it means t falls inside the jump (plateau)
                c_accrual_end = cfull[rsel, first] - dj[rsel, first]
                on_plateau = tvec[orig] >= c_accrual_end
                left_state = np.where(first > 0, xx[rsel, np.maximum(first - 1, 0)],
                                      x_prev[orig])
                left_gam = np.where(first > 0, gg[rsel, np.maximum(first - 1, 0)],
                                    g_prev[orig])
                # plateau states are exact zeros: a jump means the regulator
                # grew, which pins the step's endpoint to the boundary
                state[orig] = np.where(on_plateau, xx[rsel, first], left_state)
                gam_at[orig] = np.where(on_plateau, gg[rsel, first], left_gam)
            keep = ~any_cross
            x_prev[rows] = xx[:, -1]
            g_prev[rows] = gg[:, -1]
            rows = rows[keep]
            b = bb[keep, -1].copy()
            g = gg[keep, -1].copy()
            cj = (cfull[:, -1] - (done + bs) * dt)[keep]
            done += bs
        if rows.size:
            # the clock can end exactly at t (identity clock over a
            # jump-free path); t then reads the final grid point
            end = cj + done * dt
            if np.any(np.abs(end - tvec[rows]) > 1e-9 * (1.0 + np.abs(tvec[rows]))):
                raise RuntimeError("clock failed to cover the horizon")
            state[rows] = x_prev[rows]
            gam_at[rows] = g_prev[rows]
        fx = f(state) if f is not None else state.copy()
        if kill_mode == "weight":
            weights = np.exp(-params.kill_ratio * gam_at)
            alive = np.ones(m, dtype=bool)
        else:
            alive = gam_at < chi
            weights = alive.astype(float)
            fx = np.where(alive, fx, 0.0)
        return fx * weights, state, gam_at, alive

    parts = _run_chunks(n, worker, threads)
    return {"weighted": np.concatenate([p[0] for p in parts]),
            "state": np.concatenate([p[1] for p in parts]),
            "gamma": np.concatenate([p[2] for p in parts]),
            "alive": np.concatenate([p[3] for p in parts]),
            "dt": dt, "n": n}


def lifetime_path_mc(x: float, params: ModelParams, dt: float, n: int,
                     master_seed: int, inner_cap: float = 50.0,
                     threads: int = 1, block_steps: int = _BLOCK_STEPS) -> dict:
    """Kill-mode lifetimes through the simulated path (law-exact jump split).

    Per path: draw the threshold ``chi ~ Exp(c/sigma)``, run the reflected
    path until its regulator first exceeds ``chi`` (inner time ``k* dt``),
    and return

        zeta = k* dt + (eta/sigma)^(1/alpha) * (sum of H-increments over
               full regulator steps before k* + one fresh H over the
               remaining sliver chi - gamma_{k*-1}).

    Splitting the crossing step's jump with a fresh stable draw over the
    exact sliver keeps the jump part's law exact; the only discretization
    left is the inner crossing time (grid regulator lags the true one).
    Paths whose inner crossing exceeds ``inner_cap`` (heavy hitting-time
    tail) are censored to ``+inf``; censor identically on any comparison
    sample.  Draw order per chunk: thresholds; then per block Gaussians,
    row-major stable pairs for full steps, and one stable pair per path
    that crosses in the block.
    """
    if params.c <= 0.0:
        raise ValueError("lifetimes need c > 0")
    if not x >= 0.0:
        raise ValueError("start must be nonnegative")
    max_steps = int(math.ceil(inner_cap / dt))
    ratio = params.stickiness_ratio
    alpha = params.alpha

    def worker(chunk_index: int, m: int):
        rng = RngStream(master_seed, chunk_index)
        chi = rng.exponentials(m, rate=params.kill_ratio)
        scale = math.sqrt(2.0 * dt)
        zeta = np.full(m, np.inf)
        rows = np.arange(m)
        b = np.full(m, float(x))
        g = np.zeros(m)
        hsum = np.zeros(m)          # jump part accumulated before the crossing step
        done = 0
        while rows.size and done < max_steps:
            bs = min(block_steps, max_steps - done)
            incr = rng.normals(rows.size * bs).reshape(rows.size, bs) * scale
            bb, gg = kernels.skorokhod_block(incr, b, g)
            chir = chi[rows]
            crossed = gg > chir[:, None]
            any_cross = crossed.any(axis=1)
            dgam = np.empty_like(gg)
            dgam[:, 0] = gg[:, 0] - g
            dgam[:, 1:] = gg[:, 1:] - gg[:, :-1]
            # jump draws for every full step of the block (crossing rows
            # consume theirs too; the crossing step's own bulk draw is
            # superseded by the fresh sliver draw below)
            if ratio > 0.0 and alpha < 1.0:
                dh = stable_batch(alpha, dgam.ravel(), rng).reshape(dgam.shape)
            else:
                dh = dgam
            hcum = hsum[rows][:, None] + np.cumsum(dh, axis=1)
            if any_cross.any():
                rsel = np.nonzero(any_cross)[0]
                first = np.argmax(crossed[rsel], axis=1)
                orig = rows[rsel]
                g_before = np.where(first > 0, gg[rsel, np.maximum(first - 1, 0)],
                                    g[rsel])
                h_before = np.where(first > 0, hcum[rsel, np.maximum(first - 1, 0)],
                                    hsum[orig])
                sliver = chi[orig] - g_before
                if ratio > 0.0 and alpha < 1.0:
                    h_sliver = stable_batch(alpha, sliver, rng)
                else:
                    h_sliver = sliver
                jump_part = (ratio ** (1.0 / alpha) * (h_before + h_sliver)
                             if ratio > 0.0 else 0.0)
                zeta[orig] = (done + first + 1) * dt + jump_part
            keep = ~any_cross
            rows = rows[keep]
            b = bb[keep, -1].copy()
            g = gg[keep, -1].copy()
            hsum[rows] = hcum[keep, -1]
            done += bs
        return zeta, int(rows.size)

    parts = _run_chunks(n, worker, threads)
    zeta = np.concatenate([p[0] for p in parts])
    return {"zeta": zeta, "censored": sum(p[1] for p in parts),
            "inner_cap": inner_cap, "dt": dt, "n": n}


def fivp_evaluate(x: float, params: ModelParams, f: InitialDatum, t: float,
                  n: int, master_seed: int, dt: float = 1e-3,
                  method: str = "mc", threads: int = 1) -> McEstimate:
    """Solution of the fractional initial-value problem at ``(t, x)``.

    ``method="mc"``: composes an inverse-stable horizon ``L_t = (t/S)^alpha``
    per path with the classic sticky state engine at ``alpha = 1`` — stream
    indices ``>= 2**20`` draw the horizons, chunk streams drive the paths.
    For ``alpha = 1`` the horizon is deterministic and this is the plain
    weighted sticky expectation.  The estimate carries the state engine's
    O(sqrt(dt)) bias for discontinuous data; budgets are declared by the
    caller.

    ``method="quadrature"``: integrates the inverted classic transform
    against the inverse-stable density, MC-free (slow; cross-validation
    only).
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    classic = replace(params, alpha=1.0)
    if method == "quadrature":
        from scipy.integrate import quad

        from .laplace import fbvp_transform, invert_talbot
        from .specfun import inverse_stable_density_l

        def inner(s: float) -> float:
            if s <= 0.0:
                return float(f(np.array([x]))[0])
            return invert_talbot(lambda lam: fbvp_transform(classic, f, lam, x), s)

        if params.alpha == 1.0:
            val = inner(t)
        else:
            val, _ = quad(
                lambda s: inner(s) * inverse_stable_density_l(params.alpha, t, s),
                0.0, np.inf, limit=200)
        # deterministic path: nominal stderr documents the inversion tolerance
        return McEstimate(mean=val, stderr=1e-10, n=2,
                          seed=(master_seed, "quadrature"))

    if method != "mc":
        raise ValueError("method must be 'mc' or 'quadrature'")
    if params.alpha == 1.0:
        horizons: float | np.ndarray = t
    else:
        rng_l = RngStream(master_seed, 1 << 20)
        horizons = (t / stable_batch(params.alpha, np.ones(n), rng_l)) ** params.alpha
    out = xbar_state_mc(x, classic, horizons, dt, n, master_seed, f=f,
                        kill_mode="weight", threads=threads)
    return mc_estimate(out["weighted"], seed=master_seed)
