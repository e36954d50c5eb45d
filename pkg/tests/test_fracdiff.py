"""Caputo L1 scheme and boundary-condition residual checks.

The L1 scheme's two exactness classes (constants, affine functions)
are asserted to round-off; smooth functions get the O(dt^{2-alpha})
rate pinned by a refinement-ratio test against a closed-form Caputo
derivative.  The residual checks then couple the scheme to the inverted
boundary traces, closing the loop between the transform layer and the
time domain.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from stickybm import (
    CaputoKernel,
    InitialDatum,
    ModelParams,
    TimeSeries,
    assumption_a1_probe,
    boundary_trace_integrability,
    caputo_l1,
    caputo_l1_curve,
    fbvp_residual,
    mittag_leffler_neg,
)


# -- kernel ------------------------------------------------------------------


def test_kernel_closed_form_and_validation():
    k = CaputoKernel(0.4)
    z = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(k(z), z ** -0.4 / math.gamma(0.6), rtol=1e-15)
    assert float(k(1.0)) == pytest.approx(1.0 / math.gamma(0.6))
    with pytest.raises(ValueError):
        k(np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        CaputoKernel(1.0)
    with pytest.raises(ValueError):
        CaputoKernel(0.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_kernel_laplace_transform(alpha):
    # int_0^inf e^{-lam z} kappa(z) dz = lam^(alpha-1): the identity that
    # ties the kernel to the inverse-clock occupation density
    k = CaputoKernel(alpha)
    for lam in (0.5, 1.0, 10.0):
        got, err = quad(lambda z: math.exp(-lam * z) * float(k(z)), 0.0, np.inf)
        assert got == pytest.approx(lam ** (alpha - 1.0), rel=1e-6, abs=err)


def test_kernel_positive_decreasing():
    k = CaputoKernel(0.6)
    z = np.linspace(0.01, 5.0, 200)
    v = k(z)
    assert np.all(v > 0.0)
    assert np.all(np.diff(v) < 0.0)


# -- series container ----------------------------------------------------------


def test_timeseries_validation_and_grid():
    s = TimeSeries(0.5, np.array([1.0, 2.0, 4.0]))
    np.testing.assert_array_equal(s.grid, [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        TimeSeries(0.0, np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        TimeSeries(0.1, np.array([1.0]))
    with pytest.raises(ValueError):
        TimeSeries(0.1, np.ones((2, 2)))


# -- L1 scheme -----------------------------------------------------------------


def test_l1_constant_is_zero():
    s = TimeSeries(1e-2, np.full(50, 3.7))
    np.testing.assert_array_equal(caputo_l1_curve(s, 0.5), np.zeros(49))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_l1_affine_is_exact(alpha):
    # D^alpha (a + b t) = b t^{1-alpha} / Gamma(2-alpha), and the L1
    # scheme reproduces it to round-off
    dt, b = 1e-2, 1.4
    grid = np.arange(101) * dt
    s = TimeSeries(dt, 0.3 + b * grid)
    got = caputo_l1_curve(s, alpha)
    want = b * grid[1:] ** (1.0 - alpha) / math.gamma(2.0 - alpha)
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_l1_affine_frozen_point():
    # slope 1, alpha = 1/2, t = 1: the derivative is 1/Gamma(3/2)
    s = TimeSeries(1e-2, np.arange(101) * 1e-2)
    assert caputo_l1(s, 0.5, 100) == pytest.approx(1.1283791670955126, rel=1e-12)


def test_l1_point_accessor_and_validation():
    s = TimeSeries(1e-2, np.arange(11) * 1e-2)
    assert caputo_l1(s, 0.5, 5) == caputo_l1_curve(s, 0.5)[4]
    with pytest.raises(ValueError):
        caputo_l1(s, 0.5, 0)
    with pytest.raises(ValueError):
        caputo_l1(s, 0.5, 11)
    with pytest.raises(ValueError):
        caputo_l1_curve(s, 1.0)


def test_l1_eigenfunction_relation():
    # u = E_alpha(-q t^alpha) solves D^alpha u = -q u; away from the
    # singular layer the L1 residual is O(dt^{2-alpha})
    alpha, q, dt = 0.5, 1.2, 1e-3
    grid = np.arange(501) * dt
    u = np.array([mittag_leffler_neg(alpha, q * t ** alpha) for t in grid])
    dcap = caputo_l1_curve(TimeSeries(dt, u), alpha)
    resid = dcap + q * u[1:]
    assert np.abs(resid[200:]).max() < 2e-4


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_l1_refinement_rate(alpha):
    # halving dt must shrink the max error by 2^{2-alpha} (within 15%)
    errs = []
    for dt in (2e-3, 1e-3):
        m = int(round(1.0 / dt))
        grid = np.arange(m + 1) * dt
        got = caputo_l1_curve(TimeSeries(dt, grid ** 2), alpha)
        want = 2.0 * grid[1:] ** (2.0 - alpha) / math.gamma(3.0 - alpha)
        errs.append(np.abs(got - want).max())
    ratio = errs[0] / errs[1]
    assert 0.85 * 2 ** (2.0 - alpha) < ratio < 1.15 * 2 ** (2.0 - alpha)


# -- boundary-condition residual -------------------------------------------------


def test_residual_fractional_small():
    prm = ModelParams(eta=1.0, sigma=1.0, c=1.0, alpha=0.5)
    f = InitialDatum.exponential(1.0)
    res = fbvp_residual(prm, f, np.array([0.1, 0.5, 1.0]), dt=1e-3)
    assert np.abs(res).max() < 1e-3


def test_residual_alpha_one_spectral():
    # alpha = 1 bypasses the L1 memory sum; only inversion error remains
    prm = ModelParams(eta=1.0, sigma=1.0, c=1.0, alpha=1.0)
    f = InitialDatum.exponential(1.0)
    res = fbvp_residual(prm, f, np.array([0.5, 1.0]), dt=1e-3)
    assert np.abs(res).max() < 1e-6


def test_residual_grid_validation():
    prm = ModelParams(eta=1.0, sigma=1.0, c=0.0, alpha=0.5)
    f = InitialDatum.exponential(1.0)
    with pytest.raises(ValueError):
        fbvp_residual(prm, f, np.array([0.10037]), dt=1e-3)  # off-grid
    with pytest.raises(ValueError):
        fbvp_residual(prm, f, np.array([0.0]), dt=1e-3)


# -- interior equation probe ------------------------------------------------------


def test_a1_probe_gap_decays_toward_boundary():
    prm = ModelParams(eta=1.0, sigma=1.0, c=1.0, alpha=0.7)
    f = InitialDatum.exponential(1.0)
    gaps = np.abs(assumption_a1_probe(prm, f, 0.5, [0.8, 0.4, 0.2], dt=2e-3))
    assert np.all(np.diff(gaps) < 0.0)
    assert gaps.max() < 0.05


def test_a1_probe_alpha_one_heat_equation():
    prm = ModelParams(eta=1.0, sigma=1.0, c=1.0, alpha=1.0)
    f = InitialDatum.exponential(1.0)
    gap = assumption_a1_probe(prm, f, 0.5, [0.5], dt=2e-3)
    assert abs(gap[0]) < 2e-3


def test_a1_probe_validation():
    prm = ModelParams(eta=1.0, sigma=1.0, c=0.0, alpha=0.5)
    f = InitialDatum.exponential(1.0)
    with pytest.raises(ValueError):
        assumption_a1_probe(prm, f, 0.5, [0.0], dt=1e-3)
    with pytest.raises(ValueError):
        assumption_a1_probe(prm, f, 0.50037, [0.5], dt=1e-3)


# -- trace integrability -----------------------------------------------------------


def test_trace_singularity_exponent():
    # sticky fractional boundary: integrable singularity with p >= alpha/2
    prm = ModelParams(eta=1.0, sigma=1.0, c=0.0, alpha=0.5)
    p, resid = boundary_trace_integrability(prm, InitialDatum.exponential(1.0))
    assert p >= 0.5 * prm.alpha - 1e-6
    assert p < 1.0  # there IS a singular layer
    assert resid < 0.1  # the window really is a power law


def test_trace_flat_case():
    # reflected BM preserves constants: the trace never moves, and the
    # probe must report "no singularity" instead of fitting noise
    prm = ModelParams(eta=0.0, sigma=1.0, c=0.0, alpha=1.0)
    p, resid = boundary_trace_integrability(prm, InitialDatum.constant(1.0))
    assert (p, resid) == (1.0, 0.0)
