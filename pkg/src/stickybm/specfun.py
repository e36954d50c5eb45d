"""Special functions: Mittag-Leffler on the negative axis, the heat
kernel, and the densities of the stable subordinator and its inverse.

Normalization convention used throughout the package: the generator is
d^2/dx^2 (no 1/2), so the heat kernel is g(t,z) = exp(-z^2/4t)/sqrt(4*pi*t)
with variance 2t, and the subordinator symbol is E exp(-lam*H_t)
= exp(-t*lam^alpha).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import airy, rgamma

# The alternating power series cancels catastrophically once terms grow
# before decaying, which happens early for small alpha; past the cutoff
# the spectral integral / asymptotic pair takes over.
_SERIES_CUTOFF = 1.0
_TERM_RATIO = 1e-16


def _ml_series(alpha: float, x: float) -> float:
    # power series sum_k (-x)^k / Gamma(alpha*k + 1); term-ratio stopping.
    acc = 1.0
    term = 1.0
    for k in range(1, 400):
        term = (-x) ** k * rgamma(alpha * k + 1.0)
        acc += term
        if abs(term) <= _TERM_RATIO * max(abs(acc), 1e-300):
            break
    return acc


def _ml_integral(alpha: float, x: float) -> tuple[float, float]:
    """Spectral integral for E_alpha(-x), x > 0, 0 < alpha < 1.

    After substituting u = v^(1/alpha) in the standard branch-cut
    representation the integrand is smooth:

        E_alpha(-x) = sin(alpha*pi)/(alpha*pi) *
                      int_0^inf x exp(-v^(1/alpha)) / (v^2 + 2xv cos(alpha pi) + x^2) dv

    Returns (value, error estimate from the quadrature).
    """
    cosap = math.cos(alpha * math.pi)
    sinap = math.sin(alpha * math.pi)
    pref = sinap / (alpha * math.pi)

    def integrand(v: float) -> float:
        return x * math.exp(-v ** (1.0 / alpha)) / ((v + x * cosap) ** 2 + (x * sinap) ** 2)

    # the exponential factor underflows past v ~ 690^alpha, which for small
    # alpha is far inside the Lorentzian scale x: cap the range there or
    # adaptive quadrature can miss the surviving spike near the origin.
    knee = 690.0 ** alpha
    upper = min(max(20.0 * x, 50.0), knee + 10.0)
    # denominator has a Lorentzian dip at v0 = -x*cos(alpha*pi) when alpha > 1/2;
    # hand quad the dip and the exponential knee as subdivision points
    pts = sorted(v for v in (-x * cosap, 0.25 * knee, knee) if 0.0 < v < upper)
    val, err = quad(integrand, 0.0, upper, points=pts or None,
                    epsabs=1e-15, epsrel=1e-13, limit=300)
    tail, terr = quad(integrand, upper, np.inf, epsabs=1e-15, epsrel=1e-13, limit=100)
    return pref * (val + tail), abs(pref) * (err + terr)


def _ml_asymptotic(alpha: float, x: float, min_terms: int = 3) -> tuple[float, float]:
    # E_alpha(-x) ~ sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(1 - alpha*k);
    # truncate before the terms start growing, error ~ first omitted term.
    acc = 0.0
    prev = math.inf
    k = 1
    while k <= 12:
        term = (-1.0) ** (k + 1) * x ** (-k) * rgamma(1.0 - alpha * k)
        if k > min_terms and abs(term) > prev:
            break
        acc += term
        prev = abs(term)
        k += 1
    omitted = x ** (-k) * abs(rgamma(1.0 - alpha * k))
    return acc, max(omitted, prev * x ** (-1))


def mittag_leffler_neg(alpha: float, x: float) -> float:
    """E_alpha(-x) for alpha in (0, 1] and x >= 0.

    Series for small arguments; for x > 5 both the spectral integral and
    the asymptotic series are computed and the one with the smaller error
    estimate wins (the series alone cancels catastrophically there).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if alpha == 1.0:
        return math.exp(-x)
    if x == 0.0:
        return 1.0
    if x <= _SERIES_CUTOFF:
        return _ml_series(alpha, x)
    val_int, err_int = _ml_integral(alpha, x)
    val_asy, err_asy = _ml_asymptotic(alpha, x)
    # the asymptotic error estimate is optimistic; only trust it with margin
    return val_asy if 100.0 * err_asy < err_int else val_int


def mittag_leffler_neg_vec(alpha: float, x) -> np.ndarray:
    """Vectorized wrapper over :func:`mittag_leffler_neg`."""
    x = np.asarray(x, dtype=float)
    return np.vectorize(lambda v: mittag_leffler_neg(alpha, v))(x)


def gaussian_kernel(t: float, z) -> float:
    """Heat kernel g(t,z) = exp(-z^2/(4t)) / sqrt(4*pi*t) (variance 2t)."""
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    z = np.asarray(z, dtype=float)
    out = np.exp(-(z * z) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return out if out.ndim else float(out)


def _standard_stable_density(alpha: float, u: float) -> float:
    """Density g_alpha(u) of the standardized subordinator H_1 (symbol
    exp(-xi^alpha)).

    Body: the Zolotarev integral

        g(u) = (alpha/(1-alpha)) u^{-1/(1-alpha)} (1/pi)
               int_0^pi A(phi) exp(-u^{-alpha/(1-alpha)} A(phi)) dphi,
        A(phi) = [sin(alpha phi)^alpha sin((1-alpha) phi)^{1-alpha}
                  / sin(phi)]^{1/(1-alpha)},

    whose integrand is positive and bounded (contour inversion of the
    symbol is cancellation-dominated left of the mode and overflows for
    alpha > 1/2).  At alpha = 1/2 it reduces exactly to the Levy density.
    The deep left tail (saddle exponent z = B u^{-alpha/(1-alpha)} >= 200,
    with B = (1-alpha) alpha^{alpha/(1-alpha)} = A(0)) uses the
    first-order saddle form C u^{-(2-alpha)/(2-2alpha)} e^{-z} instead,
    avoiding quadrature over a fully underflowed integrand.
    """
    expo = alpha / (1.0 - alpha)
    B = (1.0 - alpha) * alpha ** expo
    c = u ** (-expo)
    if B * c >= 200.0:
        C = alpha ** (1.0 / (2.0 - 2.0 * alpha)) / math.sqrt(
            2.0 * math.pi * (1.0 - alpha))
        return C * u ** (-(2.0 - alpha) / (2.0 - 2.0 * alpha)) * math.exp(-B * c)

    def integrand(phi: float) -> float:
        if phi <= 0.0 or phi >= math.pi:
            return 0.0
        log_a = (alpha * math.log(math.sin(alpha * phi))
                 + (1.0 - alpha) * math.log(math.sin((1.0 - alpha) * phi))
                 - math.log(math.sin(phi))) / (1.0 - alpha)
        w = log_a - c * math.exp(log_a)
        return math.exp(w) if w > -745.0 else 0.0

    # A grows monotonically from A(0) = B to +inf at pi; for large u the
    # mass sits in a narrow layer near pi, so hand quad the maximum
    probe = np.linspace(1e-9, math.pi - 1e-9, 65)
    peak = float(probe[int(np.argmax([integrand(p) for p in probe]))])
    val, _ = quad(integrand, 0.0, math.pi, points=[peak],
                  epsabs=1e-300, epsrel=1e-12, limit=300)
    return (alpha / (1.0 - alpha)) * u ** (-1.0 / (1.0 - alpha)) * val / math.pi


def stable_density_h(alpha: float, t: float, s: float) -> float:
    """Density in s of the stable subordinator H_t, symbol exp(-t*xi^alpha).

    alpha = 1/2 uses the closed Levy form t*exp(-t^2/4s)/(2*sqrt(pi)*s^{3/2});
    other orders reduce by scaling H_t = t^{1/alpha} H_1 to the
    standardized density (Talbot body, saddle-form deep left tail)."""
    _check_density_args(alpha, t)
    if s <= 0:
        raise ValueError(f"s must be > 0, got {s}")
    if alpha == 0.5:
        return t * math.exp(-t * t / (4.0 * s)) / (2.0 * math.sqrt(math.pi) * s ** 1.5)
    scale = t ** (-1.0 / alpha)
    return scale * _standard_stable_density(alpha, s * scale)


def inverse_stable_density_l(alpha: float, t: float, x: float) -> float:
    """Density in x of the inverse subordinator L_t.

    Closed forms: alpha=1/2 gives 2*g(t,x); alpha=1/3 gives the Airy form
    3*(3t)^{-1/3} Ai(x (3t)^{-1/3}).  At x = 0 the value is t^{-alpha} /
    Gamma(1-alpha) for every alpha (the tail kernel identity).  Other
    (alpha, x) invert the t-transform lam^{alpha-1} exp(-x lam^alpha).
    """
    _check_density_args(alpha, t)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return t ** (-alpha) / math.gamma(1.0 - alpha)
    if alpha == 0.5:
        return 2.0 * gaussian_kernel(t, x)
    if alpha == 1.0 / 3.0:
        cube = (3.0 * t) ** (1.0 / 3.0)
        ai, _, _, _ = airy(x / cube)
        return 3.0 * ai / cube
    # P(L_t <= x) = P(H_x >= t) with H_x = x^{1/alpha} H_1 gives
    # l(t, x) = (t/alpha) x^{-1-1/alpha} g_alpha(t x^{-1/alpha}); the
    # upper tail in x is the standardized density's deep left tail
    u = t * x ** (-1.0 / alpha)
    return (t / alpha) * x ** (-1.0 - 1.0 / alpha) * _standard_stable_density(alpha, u)


def caputo_tail_kernel(alpha: float, z) -> np.ndarray:
    """kappa(z) = z^{-alpha}/Gamma(1-alpha), the Caputo convolution kernel.

    Coincides with l(z, 0); its Laplace transform is lam^{alpha-1}.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("kernel argument must be > 0")
    out = z ** (-alpha) / math.gamma(1.0 - alpha)
    return out if out.ndim else float(out)


def _check_density_args(alpha: float, t: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
