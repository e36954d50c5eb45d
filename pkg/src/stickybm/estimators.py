"""Monte Carlo summaries and reference comparisons.

Conventions used throughout the package:

* ``stderr`` is the population standard deviation (``ddof=0``) divided by
  ``sqrt(n)``; estimates require ``n >= 2``.
* A comparison against a reference value passes at a point when
  ``|mean - reference| <= k * stderr + bias_budget``; a grid-level
  comparison passes overall when at least 95% of points pass and no point
  exceeds the doubled band ``2k * stderr + bias_budget``.
* Quantities with heavy-tailed laws (infinite-mean lifetimes, hitting
  times) are summarised through survival probabilities or quantiles,
  never through sample means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "McEstimate",
    "ComparisonReport",
    "mc_estimate",
    "empirical_survival",
    "survival_estimates",
    "median_estimate",
    "compare_with_reference",
]


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its Monte Carlo standard error.

    ``seed`` records provenance (master seed or a short description of the
    generating stream); it does not affect any numeric field.
    """

    mean: float
    stderr: float
    n: int
    seed: object = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("an estimate needs at least two samples")
        if not (self.stderr >= 0.0):
            raise ValueError("stderr must be nonnegative")

    def interval(self, k: float = 3.0) -> tuple[float, float]:
        return (self.mean - k * self.stderr, self.mean + k * self.stderr)

    def __str__(self) -> str:
        return f"{self.mean:.6g} +/- {self.stderr:.2g} (n={self.n})"


def mc_estimate(samples: np.ndarray, seed: object = None) -> McEstimate:
    """Mean/stderr summary of a sample vector; requires ``len >= 2``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    n = x.size
    if n < 2:
        raise ValueError("an estimate needs at least two samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    mean = float(np.mean(x))
    stderr = float(np.std(x)) / math.sqrt(n)
    return McEstimate(mean=mean, stderr=stderr, n=n, seed=seed)


def empirical_survival(samples: np.ndarray, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Empirical survival ``P(sample > t)`` on ``grid`` with binomial stderr.

    Returns ``(survival, stderr)``; the survival values are nonincreasing in
    ``t`` by construction.  Censored samples may be encoded as ``+inf`` (they
    count as survivors at every finite time).
    """
    x = np.asarray(samples, dtype=float)
    t = np.asarray(grid, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("an estimate needs at least two samples")
    if np.any(np.isnan(x)):
        raise ValueError("samples must not contain NaN")
    surv = np.array([np.count_nonzero(x > ti) for ti in t], dtype=float) / n
    stderr = np.sqrt(surv * (1.0 - surv) / n)
    return surv, stderr


def survival_estimates(samples: np.ndarray, grid: np.ndarray, seed: object = None) -> list[McEstimate]:
    """Per-grid-point ``McEstimate`` view of :func:`empirical_survival`."""
    surv, stderr = empirical_survival(samples, grid)
    n = int(np.asarray(samples).size)
    return [McEstimate(float(p), float(se), n, seed) for p, se in zip(surv, stderr)]


def median_estimate(samples: np.ndarray, confidence_k: float = 3.0) -> tuple[float, float, float]:
    """Sample median with a distribution-free order-statistic band.

    The band is formed from the order statistics at ranks
    ``n/2 -/+ k*sqrt(n)/2``, the binomial normal approximation of a
    confidence interval for the median; suitable for heavy-tailed samples
    where means are meaningless.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 2:
        raise ValueError("an estimate needs at least two samples")
    half_width = confidence_k * math.sqrt(n) / 2.0
    lo = max(0, int(math.floor(n / 2.0 - half_width)))
    hi = min(n - 1, int(math.ceil(n / 2.0 + half_width)))
    return float(np.median(x)), float(x[lo]), float(x[hi])


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of checking MC estimates against reference values on a grid.

    A point passes when ``|mean - reference| <= k*stderr + bias_budget``;
    the report passes overall when at least 95% of points pass and no point
    violates the doubled band ``2k*stderr + bias_budget``.
    """

    grid: np.ndarray
    mc_means: np.ndarray
    mc_stderrs: np.ndarray
    reference: np.ndarray
    k: float
    bias_budget: float
    z_scores: np.ndarray = field(init=False)
    point_pass: np.ndarray = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        means = np.atleast_1d(np.asarray(self.mc_means, dtype=float))
        errs = np.atleast_1d(np.asarray(self.mc_stderrs, dtype=float))
        refs = np.atleast_1d(np.asarray(self.reference, dtype=float))
        if not (grid.shape == means.shape == errs.shape == refs.shape):
            raise ValueError("grid, estimates, and reference must share one shape")
        if np.any(errs < 0.0):
            raise ValueError("stderr must be nonnegative")
        gap = np.abs(means - refs)
        # z measures the gap left over after the bias allowance, in stderr units
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(errs > 0.0, (gap - self.bias_budget) / errs,
                         np.where(gap <= self.bias_budget, -np.inf, np.inf))
        point_ok = gap <= self.k * errs + self.bias_budget
        hard_fail = gap > 2.0 * self.k * errs + self.bias_budget
        overall = (np.mean(point_ok) >= 0.95) and not np.any(hard_fail)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mc_means", means)
        object.__setattr__(self, "mc_stderrs", errs)
        object.__setattr__(self, "reference", refs)
        object.__setattr__(self, "z_scores", z)
        object.__setattr__(self, "point_pass", point_ok)
        object.__setattr__(self, "passed", bool(overall))

    def worst_z(self) -> float:
        return float(np.max(self.z_scores))

    def summary(self) -> str:
        lines = [
            f"comparison: k={self.k:g}, bias_budget={self.bias_budget:g}, "
            f"{int(np.sum(self.point_pass))}/{self.point_pass.size} points pass, "
            f"overall {'PASS' if self.passed else 'FAIL'}"
        ]
        for g, m, e, r, ok in zip(self.grid, self.mc_means, self.mc_stderrs,
                                  self.reference, self.point_pass):
            lines.append(
                f"  t={g:<8g} mc={m: .6f} ref={r: .6f} stderr={e:.2e} "
                f"{'ok' if ok else 'FAIL'}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "grid": [float(v) for v in self.grid],
            "mc_means": [float(v) for v in self.mc_means],
            "mc_stderrs": [float(v) for v in self.mc_stderrs],
            "reference": [float(v) for v in self.reference],
            "k": float(self.k),
            "bias_budget": float(self.bias_budget),
            "z_scores": [float(v) for v in self.z_scores],
            "point_pass": [bool(v) for v in self.point_pass],
            "passed": bool(self.passed),
        }


def compare_with_reference(grid, mc_means, mc_stderrs, reference,
                           k: float = 3.0, bias_budget: float = 0.0) -> ComparisonReport:
    """Build a :class:`ComparisonReport`; see the class for the pass rule."""
    return ComparisonReport(grid=grid, mc_means=mc_means, mc_stderrs=mc_stderrs,
                            reference=reference, k=k, bias_budget=bias_budget)
