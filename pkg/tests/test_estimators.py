"""MC summary statistics and the grid comparison rule."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stickybm import (
    ComparisonReport,
    McEstimate,
    compare_with_reference,
    empirical_survival,
    mc_estimate,
    median_estimate,
    survival_estimates,
)


def test_mc_estimate_frozen_two_point():
    # samples [0, 1]: mean 1/2, population sd 1/2, stderr 1/(2 sqrt 2)
    est = mc_estimate(np.array([0.0, 1.0]))
    assert est.mean == 0.5
    assert est.stderr == pytest.approx(0.35355339059327373, rel=0, abs=0)
    assert est.n == 2


def test_mc_estimate_uses_population_sd():
    x = np.array([1.0, 2.0, 3.0, 6.0])
    est = mc_estimate(x, seed="unit")
    assert est.stderr == pytest.approx(float(np.std(x)) / 2.0)
    assert est.seed == "unit"
    lo, hi = est.interval(2.0)
    assert (lo + hi) / 2.0 == pytest.approx(est.mean)
    assert "n=4" in str(est)


def test_mc_estimate_rejects_degenerate_input():
    with pytest.raises(ValueError):
        mc_estimate(np.array([1.0]))
    with pytest.raises(ValueError):
        mc_estimate(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        mc_estimate(np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        McEstimate(mean=0.0, stderr=-1.0, n=5)
    with pytest.raises(ValueError):
        McEstimate(mean=0.0, stderr=0.1, n=1)


def test_survival_counts_and_censoring():
    # +inf encodes censored draws: survivors at every finite time
    x = np.array([0.5, 1.5, 2.5, np.inf])
    surv, se = empirical_survival(x, np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(surv, [0.75, 0.5, 0.25])
    np.testing.assert_allclose(se, np.sqrt(surv * (1 - surv) / 4))
    assert np.all(np.diff(surv) <= 0.0)


def test_survival_rejects_nan():
    with pytest.raises(ValueError):
        empirical_survival(np.array([1.0, np.nan]), np.array([1.0]))


def test_survival_estimates_wrapper():
    ests = survival_estimates(np.array([0.5, 1.5, 2.5, 3.5]), np.array([1.0, 3.0]), seed=9)
    assert [e.mean for e in ests] == [0.75, 0.25]
    assert all(e.n == 4 and e.seed == 9 for e in ests)


def test_median_estimate_brackets_median():
    rng = np.random.default_rng(5)
    x = rng.pareto(0.8, size=4001)  # infinite-mean sample
    med, lo, hi = median_estimate(x)
    assert lo <= med <= hi
    true_med = 2.0 ** (1.0 / 0.8) - 1.0
    assert lo <= true_med <= hi
    with pytest.raises(ValueError):
        median_estimate(np.array([1.0]))


# -- comparison rule ---------------------------------------------------------


def test_comparison_simple_pass():
    rep = compare_with_reference(
        grid=[1.0, 2.0], mc_means=[0.99, 2.02], mc_stderrs=[0.01, 0.01],
        reference=[1.0, 2.0], k=3.0,
    )
    assert rep.passed
    assert rep.worst_z() == pytest.approx(2.0)
    assert "PASS" in rep.summary()
    d = rep.to_dict()
    assert d["passed"] is True and len(d["z_scores"]) == 2


def test_comparison_95_percent_rule():
    # 19 of 20 points inside the k-band, one between k and 2k: passes
    n = 20
    means = np.zeros(n)
    means[0] = 0.05  # 5 stderr: beyond k=3, inside 2k=6
    rep = compare_with_reference(
        grid=np.arange(n, dtype=float), mc_means=means,
        mc_stderrs=np.full(n, 0.01), reference=np.zeros(n), k=3.0,
    )
    assert rep.passed
    assert not rep.point_pass[0] and np.all(rep.point_pass[1:])
    # two soft failures out of 20 breaks the 95% rule
    means2 = means.copy()
    means2[1] = 0.05
    rep2 = compare_with_reference(
        grid=np.arange(n, dtype=float), mc_means=means2,
        mc_stderrs=np.full(n, 0.01), reference=np.zeros(n), k=3.0,
    )
    assert not rep2.passed


def test_comparison_hard_fail_overrides_rate():
    # a single point beyond 2k fails the report even at 95% pass rate
    n = 40
    means = np.zeros(n)
    means[0] = 0.07  # 7 stderr > 2k
    rep = compare_with_reference(
        grid=np.arange(n, dtype=float), mc_means=means,
        mc_stderrs=np.full(n, 0.01), reference=np.zeros(n), k=3.0,
    )
    assert np.mean(rep.point_pass) >= 0.95
    assert not rep.passed


def test_comparison_bias_budget_shifts_band():
    rep = compare_with_reference(
        grid=[0.0], mc_means=[0.5], mc_stderrs=[0.01], reference=[0.0],
        k=3.0, bias_budget=0.48,
    )
    assert rep.passed  # gap 0.5 <= 3*0.01 + 0.48
    assert rep.worst_z() == pytest.approx(2.0)
    rep2 = compare_with_reference(
        grid=[0.0], mc_means=[0.5], mc_stderrs=[0.01], reference=[0.0], k=3.0,
    )
    assert not rep2.passed


def test_comparison_zero_stderr_points():
    # exact equality with zero stderr is a pass; any gap is an inf z
    rep = compare_with_reference([0.0], [1.0], [0.0], [1.0])
    assert rep.passed and rep.worst_z() == -math.inf
    rep2 = compare_with_reference([0.0], [1.0], [0.0], [1.1])
    assert not rep2.passed and rep2.worst_z() == math.inf


def test_comparison_validation():
    with pytest.raises(ValueError):
        compare_with_reference([0.0, 1.0], [0.0], [0.1], [0.0])
    with pytest.raises(ValueError):
        compare_with_reference([0.0], [0.0], [-0.1], [0.0])


@settings(max_examples=100, deadline=None)
@given(
    gaps=st.lists(st.floats(0.0, 10.0), min_size=1, max_size=30),
    k=st.floats(1.0, 5.0),
    budget=st.floats(0.0, 1.0),
)
def test_comparison_rule_matches_specification(gaps, k, budget):
    gaps = np.asarray(gaps)
    se = np.full(gaps.shape, 0.5)
    rep = compare_with_reference(
        grid=np.arange(gaps.size, dtype=float), mc_means=gaps,
        mc_stderrs=se, reference=np.zeros_like(gaps), k=k, bias_budget=budget,
    )
    point_ok = gaps <= k * se + budget
    hard = gaps > 2 * k * se + budget
    assert np.array_equal(rep.point_pass, point_ok)
    assert rep.passed == (np.mean(point_ok) >= 0.95 and not np.any(hard))
