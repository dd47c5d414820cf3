import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberinsure import (
    DistortionFunction,
    LossDistribution,
    RiskFunctional,
    UtilityCurve,
    arrow_pratt,
    avar,
    avar_minimization,
    choquet_distortion,
    evaluate_risk,
)
from cyberinsure.preferences import distortion_from_dict, risk_from_dict, utility_from_dict

import oracle

TEN_PCT = LossDistribution((0, 100), (0.9, 0.1))


def test_expectation():
    assert evaluate_risk(RiskFunctional.expectation(), TEN_PCT) == pytest.approx(10, abs=1e-12)


def test_avar_level_one_is_mean():
    d = LossDistribution((3, 7, 11), (0.2, 0.5, 0.3))
    assert avar(d, 1.0) == pytest.approx(d.mean(), abs=1e-12)


def test_exponential_disutility_point_mass():
    f = RiskFunctional.expected_disutility(UtilityCurve.exponential(0.01))
    assert evaluate_risk(f, LossDistribution.point_mass(100)) == pytest.approx((math.e - 1) / 0.01, rel=1e-12)
    assert evaluate_risk(f, LossDistribution.point_mass(100)) == pytest.approx(171.828182845905, abs=1e-9)


def test_avar_examples():
    assert avar(TEN_PCT, 0.1) == pytest.approx(100, abs=1e-12)
    assert avar(TEN_PCT, 0.2) == pytest.approx(50, abs=1e-12)
    for alpha in (0.01, 0.3, 1.0):
        assert avar(LossDistribution.point_mass(5), alpha) == pytest.approx(5, abs=1e-12)


def test_avar_level_range():
    with pytest.raises(ValueError):
        avar(TEN_PCT, 0.0)
    with pytest.raises(ValueError):
        RiskFunctional.avar(1.5)


def test_choquet_examples():
    half = LossDistribution((0, 100), (0.5, 0.5))
    assert choquet_distortion(half, DistortionFunction.identity()) == pytest.approx(50, abs=1e-12)
    assert choquet_distortion(half, DistortionFunction.power(2.0)) == pytest.approx(25, abs=1e-12)
    for g in (DistortionFunction.identity(), DistortionFunction.power(0.5)):
        assert choquet_distortion(LossDistribution.point_mass(7), g) == pytest.approx(7, abs=1e-12)


def test_tabulated_distortion_needs_endpoints():
    with pytest.raises(ValueError):
        DistortionFunction.tabulated([(0, 0), (1, 0.9)])
    g = DistortionFunction.tabulated([(0, 0), (0.5, 0.8), (1, 1)])
    assert g(0.25) == pytest.approx(0.4)


def test_arrow_pratt_examples():
    assert arrow_pratt(UtilityCurve.exponential(0.5), 3.0) == pytest.approx(0.5, abs=1e-12)
    assert arrow_pratt(UtilityCurve.exponential(0.5), -2.0) == pytest.approx(0.5, abs=1e-12)
    assert arrow_pratt(UtilityCurve.linear(), 42.0) == 0.0
    assert arrow_pratt(lambda z: z - 0.01 * z * z, 10.0) == pytest.approx(0.025, abs=1e-6)


def test_arrow_pratt_tabulated_needs_interior_point():
    curve = UtilityCurve.tabulated([(0, 0), (10, 10), (20, 30)])
    with pytest.raises(ValueError):
        arrow_pratt(curve, 0.0)
    assert arrow_pratt(curve, 5.0) == pytest.approx(0.0, abs=1e-9)


def test_tabulated_curve_interpolates():
    curve = UtilityCurve.tabulated([(0, 0), (10, 10), (20, 30)])
    assert curve(15) == pytest.approx(20)
    with pytest.raises(ValueError):
        UtilityCurve.tabulated([(0, 1), (1, 0)])


def test_power_curve_is_odd():
    u = UtilityCurve.power(1.5)
    assert u(-4.0) == -u(4.0) == -8.0


def test_gain_equivalent():
    u = UtilityCurve.exponential(0.1)
    assert u.gain(5.0) == -u(-5.0)


def test_serialization_round_trip():
    for f in (
        RiskFunctional.expectation(),
        RiskFunctional.avar(0.25),
        RiskFunctional.expected_disutility(UtilityCurve.exponential(0.02)),
        RiskFunctional.expected_disutility(UtilityCurve.tabulated([(0, 0), (1, 2)])),
        RiskFunctional.distortion(DistortionFunction.power(0.7)),
    ):
        assert risk_from_dict(f.to_dict()) == f


def test_parsers_reject_unknown_and_missing():
    with pytest.raises(ValueError, match="unknown parameter"):
        risk_from_dict({"kind": "avar", "params": {"alpha": 0.5, "beta": 1}})
    with pytest.raises(ValueError, match="missing parameter"):
        utility_from_dict({"kind": "exponential", "params": {}})
    with pytest.raises(ValueError):
        distortion_from_dict({"kind": "cubic", "params": {}})
    with pytest.raises(ValueError):
        risk_from_dict({"kind": "mystery"})


def test_invalid_distribution_rejected():
    with pytest.raises(ValueError):
        evaluate_risk(RiskFunctional.expectation(), LossDistribution((0, 1), (0.5, 0.6)))


# -- properties ---------------------------------------------------------------

values_st = st.lists(st.floats(-50, 150, allow_nan=False), min_size=1, max_size=8)


@st.composite
def distributions(draw):
    values = draw(values_st)
    weights = draw(st.lists(st.integers(0, 9), min_size=len(values), max_size=len(values)))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return LossDistribution(tuple(values), tuple(w / total for w in weights))


alphas = st.floats(0.01, 1.0)


@settings(max_examples=300, deadline=None)
@given(distributions(), alphas)
def test_avar_formulas_agree(d, alpha):
    assert avar(d, alpha) == pytest.approx(avar_minimization(d, alpha), abs=1e-9)
    assert avar(d, alpha) == pytest.approx(oracle.avar_by_minimization(d.values, d.probs, alpha), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(distributions(), alphas, alphas)
def test_avar_non_increasing_in_level(d, a, b):
    lo, hi = sorted((a, b))
    assert avar(d, lo) >= avar(d, hi) - 1e-9


@settings(max_examples=200, deadline=None)
@given(distributions())
def test_avar_small_level_is_max(d):
    positive = [p for p in d.probs if p > 0]
    alpha = min(positive) / 2
    top = max(v for v, p in zip(d.values, d.probs) if p > 0)
    assert avar(d, alpha) == pytest.approx(top, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(distributions())
def test_identity_distortion_is_expectation(d):
    assert choquet_distortion(d, DistortionFunction.identity()) == pytest.approx(d.mean(), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(distributions(), st.floats(0.2, 3.0))
def test_choquet_matches_layer_oracle(d, beta):
    g = DistortionFunction.power(beta)
    assert choquet_distortion(d, g) == pytest.approx(
        oracle.choquet_by_layers(d.values, d.probs, lambda s: s**beta), abs=1e-9
    )


@settings(max_examples=200, deadline=None)
@given(distributions())
def test_linear_disutility_is_expectation(d):
    f = RiskFunctional.expected_disutility(UtilityCurve.linear())
    assert evaluate_risk(f, d) == pytest.approx(d.mean(), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(-5, 5))
def test_exponential_arrow_pratt_constant(gamma, z):
    assert arrow_pratt(UtilityCurve.exponential(gamma), z) == pytest.approx(gamma, rel=1e-12)
