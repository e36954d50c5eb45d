"""Domain types shared across the toolkit.

``ModelParams`` carries the boundary-condition coefficients of the
Wentzell/Feller-Robin condition  eta*phi'' = sigma*phi' - c*phi  together
with the fractional order alpha of the boundary clock.  ``InitialDatum``
describes the bounded initial/terminal datum f appearing in every
transform and Monte Carlo estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Boundary coefficients (eta, sigma, c) and fractional order alpha.

    eta >= 0 is the stickiness weight, sigma > 0 the reflection weight,
    c >= 0 the elastic (Robin) kill rate, alpha in (0, 1] the order of the
    Caputo derivative acting at the boundary (alpha = 1 is the classic
    sticky-elastic case).
    """

    eta: float
    sigma: float
    c: float = 0.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ValueError(f"eta must be finite and >= 0, got {self.eta}")
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma}")
        if not np.isfinite(self.c) or self.c < 0:
            raise ValueError(f"c must be finite and >= 0, got {self.c}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def stickiness_ratio(self) -> float:
        """eta/sigma, the coefficient of the local time in the clock."""
        return self.eta / self.sigma

    @property
    def kill_ratio(self) -> float:
        """c/sigma, the elastic rate in the Skorokhod local-time scale."""
        return self.c / self.sigma


# Initial datum kinds.  All are bounded with a defined value at 0; the
# indicator kinds extend the continuous class for occupation experiments.
_KINDS = (
    "constant",        # f(y) = a
    "indicator",       # f = 1_{[0, eps]}   (closed at 0, f(0) = 1)
    "interval",        # f = 1_{(lo, hi)}   (open, f(0) = 0 even if lo = 0)
    "indicator_pos",   # f = 1_{(0, inf)}   (f(0) = 0)
    "exponential",     # f(y) = exp(-beta*y)
    "point_mass",      # f = w * 1_{{0}}    (zero Lebesgue mass)
    "tabulated",       # piecewise-linear interpolant, zero beyond last knot
)


@dataclass(frozen=True)
class InitialDatum:
    """Bounded datum f on [0, inf) with closed-form transform helpers.

    Construct through the classmethods; the ``kind`` tag drives the
    closed-form branches in :mod:`stickybm.laplace`.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    knots: Tuple[float, ...] = field(default=())
    values: Tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown datum kind {self.kind!r}")
        if self.kind in ("indicator", "interval"):
            lo, hi = (0.0, self.a) if self.kind == "indicator" else (self.a, self.b)
            if not 0 <= lo < hi:
                raise ValueError(f"degenerate indicator bounds ({lo}, {hi})")
        if self.kind == "exponential" and self.a <= 0:
            raise ValueError("exponential datum needs beta > 0")
        if self.kind == "tabulated":
            y = np.asarray(self.knots, dtype=float)
            if y.size < 2 or y[0] != 0.0 or np.any(np.diff(y) <= 0):
                raise ValueError("tabulated datum needs increasing knots starting at 0")
            if len(self.values) != y.size:
                raise ValueError("knots and values must have equal length")

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value: float = 1.0) -> "InitialDatum":
        return cls("constant", a=float(value))

    @classmethod
    def indicator(cls, eps: float) -> "InitialDatum":
        """f = 1 on [0, eps], 0 beyond; f(0) = 1."""
        return cls("indicator", a=float(eps))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "InitialDatum":
        """f = 1 on the open interval (lo, hi); f(0) = 0."""
        return cls("interval", a=float(lo), b=float(hi))

    @classmethod
    def positive_indicator(cls) -> "InitialDatum":
        """f = 1 on (0, inf), f(0) = 0; Lebesgue-equal to 1 but not at 0."""
        return cls("indicator_pos")

    @classmethod
    def exponential(cls, beta: float = 1.0) -> "InitialDatum":
        return cls("exponential", a=float(beta))

    @classmethod
    def point_mass(cls, weight: float = 1.0) -> "InitialDatum":
        """f = weight at y = 0 exactly, 0 elsewhere (zero Lebesgue mass)."""
        return cls("point_mass", a=float(weight))

    @classmethod
    def tabulated(cls, knots, values) -> "InitialDatum":
        return cls(
            "tabulated",
            knots=tuple(float(v) for v in knots),
            values=tuple(float(v) for v in values),
        )

    # -- evaluation ----------------------------------------------------

    def __call__(self, y):
        """Pointwise values; accepts scalars or numpy arrays."""
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            out = np.full_like(y, self.a)
        elif self.kind == "indicator":
            out = np.where((y >= 0.0) & (y <= self.a), 1.0, 0.0)
        elif self.kind == "interval":
            out = np.where((y > self.a) & (y < self.b), 1.0, 0.0)
        elif self.kind == "indicator_pos":
            out = np.where(y > 0.0, 1.0, 0.0)
        elif self.kind == "exponential":
            out = np.exp(-self.a * y)
        elif self.kind == "point_mass":
            out = np.where(y == 0.0, self.a, 0.0)
        else:  # tabulated: linear between knots, zero beyond the last
            out = np.interp(y, self.knots, self.values, right=0.0)
        return out if out.ndim else float(out)

    @property
    def at_zero(self) -> float:
        """f(0); the boundary value entering every transform."""
        return float(self(0.0))

    @property
    def sup_norm(self) -> float:
        if self.kind == "constant":
            return abs(self.a)
        if self.kind in ("indicator", "interval", "indicator_pos"):
            return 1.0
        if self.kind == "exponential":
            return 1.0
        if self.kind == "point_mass":
            return abs(self.a)
        return float(np.max(np.abs(self.values)))

    @property
    def lebesgue_tail_level(self) -> float:
        """Limit of f at +infinity (0 for all kinds with decaying tail)."""
        if self.kind == "constant":
            return self.a
        if self.kind == "indicator_pos":
            return 1.0
        return 0.0

    @property
    def is_discontinuous(self) -> bool:
        # indicator-style data degrade inversion accuracy (Gibbs); the
        # inversion tolerances are relaxed for these kinds.
        return self.kind in ("indicator", "interval", "indicator_pos", "point_mass")
