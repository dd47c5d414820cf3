import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberinsure import (
    ActionGrid,
    LossDistribution,
    OutcomeSpace,
    RiskKernel,
    cdf,
    check_kernel_monotone,
    fosd_dominates,
    validate_distribution,
)
from cyberinsure.riskspace import InvalidDistributionError


def dist(pairs):
    return LossDistribution(tuple(v for v, _ in pairs), tuple(p for _, p in pairs))


def test_validate_uniform_ok():
    assert validate_distribution(LossDistribution((0, 1), (0.5, 0.5)), 2).ok


def test_validate_bad_sum():
    report = validate_distribution(LossDistribution((0, 1), (0.5, 0.6)))
    assert not report.ok
    assert any("sum = 1.1" in v for v in report.violations)


def test_validate_negative_probability_sum_ok():
    report = validate_distribution(LossDistribution((0, 1), (-0.1, 1.1)))
    assert any("negative probability" in v for v in report.violations)
    assert not any(v.startswith("sum") for v in report.violations)


def test_validate_length_mismatch():
    report = validate_distribution(LossDistribution((0, 1), (1.0,)), 2)
    assert any("length mismatch" in v for v in report.violations)


def test_validate_non_finite():
    report = validate_distribution(LossDistribution((0, math.inf), (0.5, 0.5)))
    assert any("non-finite" in v for v in report.violations)


def test_cdf_examples():
    assert cdf(LossDistribution((0, 100), (0.9, 0.1))) == [(0, 0.9), (100, 1.0)]
    assert cdf(LossDistribution.point_mass(5)) == [(5, 1.0)]
    steps = cdf(LossDistribution((0, 5, 10), (0.4, 0.3, 0.3)))
    assert [t for t, _ in steps] == [0, 5, 10]
    assert [c for _, c in steps] == pytest.approx([0.4, 0.7, 1.0], abs=1e-15)


def test_cdf_merges_equal_losses():
    steps = cdf(LossDistribution((10, 0, 10), (0.25, 0.5, 0.25)))
    assert steps == [(0, 0.5), (10, 1.0)]


def test_cdf_rejects_invalid():
    with pytest.raises(InvalidDistributionError):
        cdf(LossDistribution((0, 1), (0.5, 0.6)))


def test_fosd_examples():
    d1 = dist([(0, 0.5), (10, 0.5)])
    d2 = dist([(0, 0.8), (10, 0.2)])
    assert fosd_dominates(d1, d2)
    assert not fosd_dominates(d2, d1)
    assert fosd_dominates(d1, d1)
    a = dist([(0, 0.5), (5, 0.0), (10, 0.5)])
    b = dist([(0, 0.4), (5, 0.3), (10, 0.3)])
    assert not fosd_dominates(a, b)
    assert not fosd_dominates(b, a)


def s1_kernel(p):
    space = OutcomeSpace.from_losses([0, 100])
    return RiskKernel(space, ActionGrid.from_costs([10 * i for i in range(len(p))]), tuple((1 - q, q) for q in p))


def test_kernel_monotone_examples():
    assert check_kernel_monotone(s1_kernel([0.5, 0.2, 0.1])).ok
    assert check_kernel_monotone(s1_kernel([0.3])).ok
    report = check_kernel_monotone(s1_kernel([0.2, 0.5]))
    assert not report.ok
    assert "(0, 1)" in str(report)
    assert not s1_kernel([0.2, 0.5]).fosd_monotone


def test_kernel_rejects_bad_row():
    with pytest.raises(InvalidDistributionError, match=r"kernel\[1\]"):
        s1_kernel([0.5, 1.2])


def test_space_and_grid_validation():
    with pytest.raises(ValueError):
        OutcomeSpace.from_losses([])
    with pytest.raises(ValueError):
        OutcomeSpace.from_losses([0, -1])
    with pytest.raises(ValueError):
        OutcomeSpace.from_losses([0, 1], ["a", "a"])
    with pytest.raises(ValueError):
        ActionGrid.from_costs([0, 1], [1, 1])
    with pytest.raises(ValueError):
        ActionGrid.from_costs([-1])
    grid = ActionGrid.from_costs([0, 5], [0.5, 2.0])
    assert grid.index_of(2.0) == 1
    with pytest.raises(KeyError):
        grid.index_of(3.0)


# -- properties ---------------------------------------------------------------

SUPPORT = [0.0, 1.0, 2.5, 5.0, 10.0]


@st.composite
def distributions(draw):
    weights = draw(st.lists(st.integers(0, 5), min_size=len(SUPPORT), max_size=len(SUPPORT)))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return LossDistribution(tuple(SUPPORT), tuple(w / total for w in weights))


def merged_cdf(d, t):
    return math.fsum(p for v, p in zip(d.values, d.probs) if v <= t)


@settings(max_examples=200, deadline=None)
@given(distributions())
def test_fosd_reflexive(d):
    assert fosd_dominates(d, d)


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions(), distributions())
def test_fosd_transitive(a, b, c):
    if fosd_dominates(a, b) and fosd_dominates(b, c):
        assert fosd_dominates(a, c)


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions())
def test_fosd_antisymmetric_up_to_cdf(a, b):
    if fosd_dominates(a, b) and fosd_dominates(b, a):
        for t in SUPPORT:
            assert abs(merged_cdf(a, t) - merged_cdf(b, t)) <= 2e-12


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions())
def test_fosd_implies_larger_mean(a, b):
    if fosd_dominates(a, b):
        assert a.mean() >= b.mean() - 1e-9


@settings(max_examples=200, deadline=None)
@given(distributions())
def test_cdf_nondecreasing_ends_at_one(d):
    steps = cdf(d)
    cums = [c for _, c in steps]
    assert all(y >= x for x, y in zip(cums, cums[1:]))
    assert abs(cums[-1] - 1.0) <= 1e-12
