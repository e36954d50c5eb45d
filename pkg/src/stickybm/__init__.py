"""Simulation and verification toolkit for Brownian motion on [0, inf)
with sticky, elastic, and fractional (non-local) boundary conditions.

The package samples time-changed reflected Brownian motions whose boundary
clock may jump (stickiness), kill (elastic weight), and run on a fractional
subordinator; evaluates the closed-form Laplace transforms of the matching
boundary-value and initial-value problems; inverts them numerically; and
cross-checks Monte Carlo statistics against the analytic values.
"""

from ._backend import BACKEND, available_backends
from .estimators import (ComparisonReport, McEstimate, compare_with_reference,
                         empirical_survival, mc_estimate, median_estimate,
                         survival_estimates)
from .fracdiff import (CaputoKernel, TimeSeries, assumption_a1_probe,
                       boundary_trace_integrability, caputo_l1,
                       caputo_l1_curve, fbvp_residual)
from .laplace import (BoundsReport, InversionError, LaplaceFn,
                      boundary_derivative_transform, dirichlet_potential,
                      exp_weighted_integral, fbvp_transform, fivp_transform,
                      invert_gaver_stehfest, invert_talbot,
                      occupation_transforms, verify_boundary_bounds,
                      zero_limit_mass)
from .params import InitialDatum, ModelParams
from .paths import (DualityReport, InvertedClock, Path, TimeChange,
                    WeightedSample, build_time_change, check_clock_duality,
                    exit_time_mc, fivp_evaluate, invert_time_change,
                    lifetime_path_mc, occupation_mc, path_statistics,
                    sample_lifetime_direct, simulate_reflected_bm,
                    simulate_xbar, xbar_state_mc)
from .sampling import (RngStream, inverse_stable_crossing_levels,
                       sample_inverse_stable, sample_mittag_leffler,
                       sample_stable, sample_subordinator_over_increments,
                       stable_batch)
from .specfun import (caputo_tail_kernel, gaussian_kernel,
                      inverse_stable_density_l, mittag_leffler_neg,
                      mittag_leffler_neg_vec, stable_density_h)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundsReport", "CaputoKernel", "ComparisonReport",
    "DualityReport", "InitialDatum", "InversionError", "InvertedClock",
    "LaplaceFn", "McEstimate", "ModelParams", "Path", "RngStream",
    "TimeChange", "TimeSeries", "WeightedSample", "assumption_a1_probe",
    "available_backends", "boundary_derivative_transform",
    "boundary_trace_integrability", "build_time_change", "caputo_l1",
    "caputo_l1_curve", "caputo_tail_kernel", "check_clock_duality",
    "compare_with_reference", "dirichlet_potential", "empirical_survival",
    "exit_time_mc", "exp_weighted_integral", "fbvp_residual",
    "fbvp_transform", "fivp_evaluate", "fivp_transform", "gaussian_kernel",
    "invert_gaver_stehfest", "invert_talbot", "invert_time_change",
    "inverse_stable_crossing_levels", "inverse_stable_density_l",
    "lifetime_path_mc", "mc_estimate", "median_estimate",
    "mittag_leffler_neg", "mittag_leffler_neg_vec", "occupation_mc",
    "occupation_transforms", "path_statistics", "sample_inverse_stable",
    "sample_lifetime_direct", "sample_mittag_leffler", "sample_stable",
    "sample_subordinator_over_increments", "simulate_reflected_bm",
    "simulate_xbar", "stable_batch", "stable_density_h", "survival_estimates",
    "verify_boundary_bounds", "xbar_state_mc", "zero_limit_mass",
    "__version__",
]
