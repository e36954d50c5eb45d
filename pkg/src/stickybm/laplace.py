"""Transform-domain solutions and numerical Laplace inversion.

Everything here lives on the resolvent side: closed forms for
exp-weighted integrals of the initial datum, the killed (Dirichlet)
potential, the boundary-value and initial-value problem transforms for
a Brownian motion on [0, inf) with sticky / elastic / fractional
boundary behaviour, plus fixed-Talbot and Gaver-Stehfest inversion.

Branch convention: principal branch everywhere, sqrt(lam) = lam**0.5
and lam**alpha = exp(alpha*Log lam); all transforms are analytic on
Re lam > 0 with their singularities confined to (-inf, 0].
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .params import InitialDatum, ModelParams

__all__ = [
    "LaplaceFn",
    "InversionError",
    "invert_talbot",
    "invert_gaver_stehfest",
    "exp_weighted_integral",
    "dirichlet_potential",
    "fbvp_transform",
    "fivp_transform",
    "boundary_derivative_transform",
    "occupation_transforms",
    "verify_boundary_bounds",
    "BoundsReport",
    "zero_limit_mass",
]


class InversionError(RuntimeError):
    """Raised when the two inversion schemes disagree beyond tolerance."""


@dataclass(frozen=True)
class LaplaceFn:
    """A transform F(lam), finite on Re lam > 0, vectorized over numpy arrays.

    `evaluator` must accept complex input (scalar or ndarray); principal
    branch is assumed for any fractional powers inside.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    branch: str = "principal"
    description: str = ""

    def __call__(self, lam):
        return self.evaluator(lam)

    def invert(self, t: float, nodes: int = 32) -> float:
        return invert_talbot(self, t, nodes)


# ---------------------------------------------------------------------------
# numerically safe exponential helpers (complex capable)

def _em1o(z):
    """(exp(z) - 1)/z with a series branch near 0; elementwise."""
    z = np.asarray(z)
    small = np.abs(z) < 1e-3
    zs = np.where(small, z, 0.0)
    series = 1.0 + zs / 2.0 + zs * zs / 6.0 + zs * zs * zs / 24.0
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.where(small, 1.0, (np.exp(z) - 1.0) / np.where(small, 1.0, z))
    return np.where(small, series, direct)


def _j1(z):
    """int_0^1 v*exp(-v*z) dv = (1-(1+z)exp(-z))/z^2, series near 0."""
    z = np.asarray(z)
    small = np.abs(z) < 1e-2
    zs = np.where(small, z, 0.0)
    series = 0.5 - zs / 3.0 + zs * zs / 8.0 - zs ** 3 / 30.0 + zs ** 4 / 144.0
    z_safe = np.where(small, 1.0, z)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        direct = (1.0 - (1.0 + z_safe) * np.exp(-z_safe)) / (z_safe * z_safe)
    return np.where(small, series, direct)


def _linear_exp_moment(d0, d1, u_lo, delta, s):
    """int_{u_lo}^{u_lo+delta} (d0 + d1*u) e^{-u s} du, u_lo >= 0, delta >= 0.

    Written so every exponent has non-positive real part; stable for
    small |s*delta| via series branches.
    """
    z = delta * s
    base = np.exp(-u_lo * s)
    return base * ((d0 + d1 * u_lo) * delta * _em1o(-z) + d1 * delta * delta * _j1(z))


# ---------------------------------------------------------------------------
# closed forms in the transform variable

def exp_weighted_integral(f: InitialDatum, lam):
    """int_0^inf e^{-y*sqrt(lam)} f(y) dy, closed form per datum kind.

    Accepts real or complex lam (Re lam > 0); vectorized over arrays.
    Point masses at 0 carry no Lebesgue mass and contribute 0.
    """
    lam = np.asarray(lam)
    s = np.sqrt(lam)
    if f.kind == "constant":
        return f.a / s
    if f.kind == "indicator":
        return (1.0 - np.exp(-f.a * s)) / s
    if f.kind == "indicator_pos":
        return 1.0 / s
    if f.kind == "interval":
        return (np.exp(-f.a * s) - np.exp(-f.b * s)) / s
    if f.kind == "exponential":
        return 1.0 / (f.a + s)
    if f.kind == "point_mass":
        return np.zeros_like(s)
    if f.kind == "tabulated":
        acc = np.zeros_like(s)
        knots, values = f.knots, f.values
        for k in range(len(knots) - 1):
            lo, hi = knots[k], knots[k + 1]
            c1 = (values[k + 1] - values[k]) / (hi - lo)
            c0 = values[k] - c1 * lo
            acc = acc + _linear_exp_moment(c0, c1, lo, hi - lo, s)
        return acc
    raise ValueError(f"unknown datum kind {f.kind!r}")


def _two_sided_exp_integral(f: InitialDatum, x: float, s):
    """W(x) = int_0^inf e^{-|x-y| s} f(y) dy for real x >= 0."""
    if f.kind == "constant":
        return f.a * (2.0 - np.exp(-x * s)) / s
    if f.kind == "indicator_pos":
        return (2.0 - np.exp(-x * s)) / s
    if f.kind == "indicator":
        return _interval_two_sided(0.0, f.a, x, s)
    if f.kind == "interval":
        return _interval_two_sided(f.a, f.b, x, s)
    if f.kind == "exponential":
        beta = f.a
        # int_0^x e^{-(x-y)s} e^{-beta y} dy ; u = x - y
        part_lo = np.exp(-beta * x) * _linear_exp_moment(1.0, 0.0, 0.0, x, s - beta)
        # int_x^inf e^{-(y-x)s} e^{-beta y} dy = e^{-beta x}/(s+beta)
        part_hi = np.exp(-beta * x) / (s + beta)
        return part_lo + part_hi
    if f.kind == "point_mass":
        return np.zeros_like(np.asarray(s))
    if f.kind == "tabulated":
        acc = np.zeros_like(np.asarray(s, dtype=complex) if np.iscomplexobj(s) else np.asarray(s, dtype=float))
        knots, values = f.knots, f.values
        for k in range(len(knots) - 1):
            lo, hi = knots[k], knots[k + 1]
            c1 = (values[k + 1] - values[k]) / (hi - lo)
            c0 = values[k] - c1 * lo
            lo_part, hi_part = min(hi, x), max(lo, x)
            if lo < lo_part:  # y in [lo, min(hi,x)], u = x - y decreasing
                # (c0 + c1 y) = (c0 + c1 x) - c1 u, u in [x-lo_part, x-lo]
                acc = acc + _linear_exp_moment(c0 + c1 * x, -c1, x - lo_part, lo_part - lo, s)
            if hi_part < hi:  # y in [max(lo,x), hi], u = y - x
                acc = acc + _linear_exp_moment(c0 + c1 * x, c1, hi_part - x, hi - hi_part, s)
        return acc
    raise ValueError(f"unknown datum kind {f.kind!r}")


def _interval_two_sided(a: float, b: float, x: float, s):
    """int_a^b e^{-|x-y| s} dy, exponents kept non-positive."""
    if x <= a:
        return (np.exp(-(a - x) * s) - np.exp(-(b - x) * s)) / s
    if x >= b:
        return (np.exp(-(x - b) * s) - np.exp(-(x - a) * s)) / s
    return (2.0 - np.exp(-(x - a) * s) - np.exp(-(b - x) * s)) / s


def dirichlet_potential(f: InitialDatum, lam, x: float):
    """Potential of the heat semigroup killed at 0, applied to f:

        R_dag(lam) f(x) = int_0^inf (e^{-|x-y|s} - e^{-(x+y)s})/(2s) f(y) dy,

    s = sqrt(lam).  Equals (lam - d^2/dx^2)^{-1} f with zero boundary
    condition at the origin; vanishes at x = 0.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    lam = np.asarray(lam)
    s = np.sqrt(lam)
    if x == 0.0:
        return np.zeros_like(s)
    if f.kind == "exponential":
        # (e^{-beta x} - e^{-x s})/(lam - beta^2), stable near s = beta
        beta = f.a
        w = x * (s - beta)
        return np.exp(-beta * x) * x * _em1o(-w) / (s + beta)
    two_sided = _two_sided_exp_integral(f, x, s)
    one_sided = exp_weighted_integral(f, lam)
    return (two_sided - np.exp(-x * s) * one_sided) / (2.0 * s)


def fbvp_transform(params: ModelParams, f: InitialDatum, lam, x: float):
    """Transform of the boundary-value problem solution:

        u~(lam, x) = R_dag(lam) f(x)
                   + e^{-x s} (sigma*I(f,lam) + eta*lam^{alpha-1} f(0))
                     / (c + eta*lam^alpha + sigma*s)

    with s = sqrt(lam) and I the exp-weighted integral.  alpha = 1
    recovers the classic sticky-elastic resolvent.
    """
    lam = np.asarray(lam)
    s = np.sqrt(lam)
    la = lam ** params.alpha
    numer = params.sigma * exp_weighted_integral(f, lam) + params.eta * la / lam * f.at_zero
    denom = params.c + params.eta * la + params.sigma * s
    return dirichlet_potential(f, lam, x) + np.exp(-x * s) * numer / denom


def fivp_transform(params: ModelParams, f: InitialDatum, lam, x: float):
    """Transform of the time-fractional initial-value problem solution:

        v~(lam, x) = lam^{alpha-1} * R(lam^alpha) f(x)

    where R is the alpha = 1 resolvent with the same (eta, sigma, c).
    """
    lam = np.asarray(lam)
    la = lam ** params.alpha
    classic = dataclasses.replace(params, alpha=1.0)
    return la / lam * fbvp_transform(classic, f, la, x)


def boundary_derivative_transform(params: ModelParams, f: InitialDatum, lam):
    """d/dx of the boundary-value transform at x = 0:

        du~/dx(lam, 0) = I(f, lam) - sqrt(lam) * u~(lam, 0).
    """
    lam = np.asarray(lam)
    u0 = fbvp_transform(params, f, lam, 0.0)
    return exp_weighted_integral(f, lam) - np.sqrt(lam) * u0


def occupation_transforms(params: ModelParams, lam):
    """Transforms of expected interior / boundary occupation up to t
    (conservative case, started at the boundary):

        interior = (1/lam) * sigma / ((sigma*sqrt(lam) + eta*lam^alpha) * sqrt(lam))
        boundary = (1/lam) * lam^{alpha-1} * eta / (eta*lam^alpha + sigma*sqrt(lam))

    They sum to 1/lam^2, the transform of t.  Requires c = 0.
    """
    if params.c != 0.0:
        raise ValueError("occupation split is conservative-only; requires c = 0")
    lam = np.asarray(lam)
    s = np.sqrt(lam)
    la = lam ** params.alpha
    denom = params.sigma * s + params.eta * la
    interior = params.sigma / (lam * denom * s)
    boundary = la / lam * params.eta / (lam * denom)
    return interior, boundary


def zero_limit_mass(params: ModelParams, f: InitialDatum) -> float:
    """Symbolic lam -> 0 limit of lam * u~(lam, 0).

    Removable 1/lam factors make the numerical limit ill-conditioned, so
    the limit is resolved per parameter regime: killing (c > 0) sends the
    mass to 0; otherwise the boundary clock (eta*lam^alpha) and the
    reflection term (sigma*sqrt(lam)) compete through alpha vs 1/2, with
    the Lebesgue tail level of f taking over when reflection wins.
    """
    a = f.lebesgue_tail_level
    f0 = f.at_zero
    if params.c > 0.0:
        return 0.0
    if params.eta == 0.0:
        return a
    if params.alpha < 0.5:
        return f0
    if params.alpha > 0.5:
        return a
    return (params.sigma * a + params.eta * f0) / (params.eta + params.sigma)


# ---------------------------------------------------------------------------
# boundary estimate battery

@dataclass
class BoundCheck:
    name: str
    lam: float
    lhs: float
    rhs: float
    satisfied: bool
    margin: float


@dataclass
class BoundsReport:
    """Outcome of the boundary-estimate battery on a lambda grid."""

    params: ModelParams
    datum_kind: str
    checks: list
    zero_limit: float
    zero_limit_bound: float
    zero_limit_ok: bool
    passed: bool
    first_violation: BoundCheck | None

    def summary(self) -> str:
        lines = [
            f"boundary bounds: {len(self.checks)} checks, "
            f"{'PASS' if self.passed else 'FAIL'}"
        ]
        if self.first_violation is not None:
            v = self.first_violation
            lines.append(
                f"  first violation: {v.name} at lam={v.lam:g} "
                f"(lhs={v.lhs:.6g}, rhs={v.rhs:.6g}, margin={v.margin:.3g})"
            )
        lines.append(
            f"  lam->0 mass limit {self.zero_limit:.6g} "
            f"<= {self.zero_limit_bound:.6g}: {self.zero_limit_ok}"
        )
        return "\n".join(lines)


def verify_boundary_bounds(
    params: ModelParams,
    f: InitialDatum,
    lambda_grid: Sequence[float],
) -> BoundsReport:
    """Check the resolvent-gap estimates lam*u~(lam,0) - f(0) on a grid.

    Sharp case (sup f = f(0) > 0): gap <= -f(0)*c/(c + eta*lam^alpha
    + sigma*sqrt(lam)).  With eta > 0 the square-root envelope
    B(lam) = sqrt((c/eta)lam^{-alpha} + (sigma/eta)lam^{1/2-alpha})
    bounds: gap >= -f(0)*B, gap <= (sup-f(0))*B/2, |gap| <= sup*B.
    The lam -> 0 mass limit is evaluated symbolically and compared to
    sup f - f(0) + f(0) (i.e. the limit itself must not exceed sup f).
    """
    sup = f.sup_norm
    f0 = f.at_zero
    sharp = sup == f0 and f0 > 0.0
    checks: list[BoundCheck] = []
    tol = 1e-12

    for lam in lambda_grid:
        if lam <= 0:
            raise ValueError("lambda grid must be positive")
        la = lam ** params.alpha
        sq = math.sqrt(lam)
        gap = float(np.real(fbvp_transform(params, f, lam, 0.0))) * lam - f0

        if sharp:
            rhs = -f0 * params.c / (params.c + params.eta * la + params.sigma * sq)
            _push(checks, "sharp_upper", lam, gap, rhs, gap <= rhs + tol)
        if params.eta > 0.0:
            env = math.sqrt(
                (params.c / params.eta) * lam ** (-params.alpha)
                + (params.sigma / params.eta) * lam ** (0.5 - params.alpha)
            )
            _push(checks, "lower_envelope", lam, gap, -f0 * env, gap >= -f0 * env - tol)
            if not sharp:
                rhs = 0.5 * (sup - f0) * env
                _push(checks, "upper_envelope", lam, gap, rhs, gap <= rhs + tol)
            _push(checks, "modulus_envelope", lam, abs(gap), sup * env, abs(gap) <= sup * env + tol)

    zero_limit = zero_limit_mass(params, f)
    zero_ok = zero_limit - f0 <= (sup - f0) + tol and abs(zero_limit) <= sup + tol
    bad = [c for c in checks if not c.satisfied]
    return BoundsReport(
        params=params,
        datum_kind=f.kind,
        checks=checks,
        zero_limit=zero_limit,
        zero_limit_bound=sup,
        zero_limit_ok=zero_ok,
        passed=not bad and zero_ok,
        first_violation=bad[0] if bad else None,
    )


def _push(checks: list, name: str, lam: float, lhs: float, rhs: float, ok: bool) -> None:
    checks.append(BoundCheck(name, lam, lhs, rhs, ok, lhs - rhs))


# ---------------------------------------------------------------------------
# numerical inversion

def invert_talbot(F, t: float, nodes: int = 32, cross_check_tol: float | None = None) -> float:
    """Invert a Laplace transform at t > 0 on the fixed Talbot contour.

    Uses the modified contour s(theta) = r*theta*(cot theta + i) with
    r = 2*nodes/(5t); the transform is evaluated once on the full array
    of complex nodes, so F must be numpy-vectorized.  With
    `cross_check_tol` set, a Gaver-Stehfest estimate is compared and
    InversionError raised on relative disagreement beyond the tolerance.
    """
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if nodes < 4:
        raise ValueError("need at least 4 nodes")
    fn = F.evaluator if isinstance(F, LaplaceFn) else F
    M = int(nodes)
    r = 2.0 * M / (5.0 * t)
    theta = np.arange(1, M) * (math.pi / M)
    cot = np.cos(theta) / np.sin(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    lam = np.concatenate(([r + 0.0j], s))
    vals = np.asarray(fn(lam))
    head = 0.5 * math.exp(r * t) * np.real(vals[0])
    tail = np.sum(np.real(np.exp(t * s) * vals[1:] * (1.0 + 1j * sigma)))
    out = (r / M) * (head + tail)
    if cross_check_tol is not None:
        other = invert_gaver_stehfest(fn, t)
        scale = max(abs(out), abs(other), 1e-300)
        if abs(out - other) / scale > cross_check_tol:
            raise InversionError(
                f"Talbot ({out:.9g}) and Gaver-Stehfest ({other:.9g}) disagree "
                f"beyond rel. tol {cross_check_tol:g} at t={t:g}"
            )
    return float(out)


@lru_cache(maxsize=8)
def _stehfest_coefficients(terms: int) -> tuple:
    half = terms // 2
    coeffs = []
    for k in range(1, terms + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            num = Fraction(j) ** half * Fraction(math.factorial(2 * j))
            den = (
                math.factorial(half - j)
                * math.factorial(j)
                * math.factorial(j - 1)
                * math.factorial(k - j)
                * math.factorial(2 * j - k)
            )
            acc += num / den
        sign = -1 if (half + k) % 2 else 1
        coeffs.append(sign * acc)
    return tuple(float(c) for c in coeffs)


def invert_gaver_stehfest(F, t: float, terms: int = 16) -> float:
    """Real-axis Gaver-Stehfest inversion; cross-check companion to Talbot.

    Coefficients are computed in exact rational arithmetic; in double
    precision the scheme is unstable past 18 terms, which is rejected.
    """
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if terms % 2 != 0:
        raise ValueError("terms must be even")
    if terms > 18:
        raise ValueError("terms > 18 overflows double precision")
    fn = F.evaluator if isinstance(F, LaplaceFn) else F
    ln2_t = math.log(2.0) / t
    ks = np.arange(1, terms + 1, dtype=float)
    vals = np.asarray(fn(ks * ln2_t), dtype=float)
    return float(ln2_t * np.dot(np.array(_stehfest_coefficients(terms)), vals))
