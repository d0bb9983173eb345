import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bregquant import divergence as dv
from bregquant.errors import BoundViolation, DomainError

import oracles
from catalog import CASES, IDS, build, params


# -- spot values ---------------------------------------------------------------

def test_phi_squared_norm():
    assert dv.phi(dv.squared_norm(), 1.0, 3.0) == 4.0


def test_phi_itakura_saito_matches_both_formulas():
    fn = dv.itakura_saito()
    closed = math.log(math.e / 1.0) + 1.0 / math.e - 1.0
    generic = float(oracles.phi(oracles.generator("ItakuraSaito"), 1, mp.e))
    assert dv.phi(fn, 1.0, math.e) == pytest.approx(1 / math.e, rel=1e-14)
    assert closed == pytest.approx(1 / math.e, rel=1e-14)
    assert generic == pytest.approx(1 / math.e, rel=1e-14)


def test_phi_kullback_leibler():
    assert dv.phi(dv.kullback_leibler(), 2.0, 1.0) == pytest.approx(2 * math.log(2) - 1, rel=1e-14)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_phi_against_high_precision_definition(case):
    _, spec, (a, b) = case
    fn = build(spec)
    F = oracles.generator(spec["kind"], **params(spec))
    rng = np.random.default_rng(7)
    for xi, x in rng.uniform(a, b, size=(25, 2)):
        ref = float(oracles.phi(F, xi, x))
        assert dv.phi(fn, xi, x) == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_derivatives_against_high_precision(case):
    _, spec, (a, b) = case
    fn = build(spec)
    F = oracles.generator(spec["kind"], **params(spec))
    for x in np.linspace(a, b, 9):
        assert float(fn.f1(x)) == pytest.approx(float(mp.diff(F, x, 1)), rel=1e-12, abs=1e-14)
        assert float(fn.f2(x)) == pytest.approx(float(mp.diff(F, x, 2)), rel=1e-12)
        assert float(fn.third(x)) == pytest.approx(float(mp.diff(F, x, 3)), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_f2_positive_and_f1_increasing(case):
    _, spec, (a, b) = case
    fn = build(spec)
    x = np.linspace(a, b, 500)
    assert np.all(fn.f2(x) > 0)
    assert np.all(np.diff(fn.f1(x)) > 0)


# -- domain handling -------------------------------------------------------------

@pytest.mark.parametrize("fn,bad", [
    (dv.itakura_saito(), 0.0),
    (dv.itakura_saito(), -1.0),
    (dv.kullback_leibler(), 0.0),
    (dv.logistic(), 1.0),
    (dv.logistic(), 0.0),
    (dv.norm_like(2.5), -0.1),
])
def test_domain_error(fn, bad):
    with pytest.raises(DomainError):
        dv.phi(fn, bad, 0.5)
    with pytest.raises(DomainError):
        dv.phi(fn, 0.5, bad)


def test_domain_margin_rejects_boundary_hits():
    with pytest.raises(DomainError):
        dv.phi(dv.itakura_saito(), 1e-13, 1.0)
    assert dv.phi(dv.itakura_saito(), 1e-10, 1.0) > 0


@pytest.mark.parametrize("bad", [
    {"kind": "Exponential", "a": 0.0},
    {"kind": "SoftPlus", "a": -1.0},
    {"kind": "SoftButterfly", "a": 0.0},
    {"kind": "NormLike", "lam": 1.0},
    {"kind": "SoftPlus"},
    {"kind": "SquaredNorm", "a": 1.0},
    {"kind": "Hinge"},
])
def test_from_spec_rejects(bad):
    with pytest.raises(DomainError):
        dv.from_spec(bad)


def test_exponential_allows_negative_rate():
    fn = dv.exponential(-2.0)
    assert dv.phi(fn, 0.0, 1.0) > 0


# -- linear combinations ---------------------------------------------------------

def test_linear_combination_single_term():
    assert dv.phi_linear_combination([(1.0, dv.squared_norm())], 1.0, 3.0) == 4.0


def test_linear_combination_zero_weight_is_dropped():
    # the IS term would be undefined nowhere here, but must contribute nothing
    assert dv.phi_linear_combination([(2.0, dv.squared_norm()), (0.0, dv.itakura_saito())], 1.0, 2.0) == 2.0


def test_linear_combination_sum():
    out = dv.phi_linear_combination([(1.0, dv.squared_norm()), (1.0, dv.kullback_leibler())], 2.0, 1.0)
    assert out == pytest.approx(1 + 2 * math.log(2) - 1, rel=1e-14)


@pytest.mark.parametrize("terms", [[], [(0.0, dv.squared_norm())], [(-1.0, dv.squared_norm())]])
def test_linear_combination_rejects(terms):
    with pytest.raises(DomainError):
        dv.phi_linear_combination(terms, 1.0, 2.0)


def test_linear_combination_generator_matches_weighted_sum():
    terms = [(0.5, dv.squared_norm()), (2.0, dv.kullback_leibler())]
    fn = dv.linear_combination(terms)
    assert fn.domain == (0.0, math.inf)
    for xi, x in [(0.3, 2.0), (1.5, 0.7)]:
        assert dv.phi(fn, xi, x) == pytest.approx(dv.phi_linear_combination(terms, xi, x), rel=1e-14)


# -- three-point identity and envelope -------------------------------------------

@pytest.mark.parametrize("fn,u,v,w", [
    (dv.squared_norm(), 0.0, 1.0, 2.0),
    (dv.softplus(1.0), -1.0, 0.5, 2.0),
    (dv.itakura_saito(), 0.3, 1.0, 2.5),
])
def test_three_point_examples(fn, u, v, w):
    assert abs(dv.three_point_residual(fn, u, v, w)) <= 1e-12 * (1 + dv.phi(fn, u, w))


def test_envelope_quadratic_is_tight():
    assert dv.euclidean_envelope(dv.squared_norm(), 0.0, 1.0, lipschitz_of_f1=2.0, alpha=2.0) == (1.0, 1.0, 1.0)
    assert dv.euclidean_envelope(dv.squared_norm(), 1.0, 1.0, lipschitz_of_f1=2.0, alpha=2.0) == (0.0, 0.0, 0.0)


def test_envelope_softplus_upper_bound():
    lower, value, upper = dv.euclidean_envelope(dv.softplus(1.0), 0.0, 2.0, lipschitz_of_f1=0.25)
    assert lower == 0.0 and upper == 0.5
    assert value <= 0.5
    assert value == pytest.approx(float(oracles.phi(oracles.generator("SoftPlus", a=1), 0, 2)), rel=1e-13)


def test_envelope_detects_wrong_constants():
    with pytest.raises(BoundViolation):
        dv.euclidean_envelope(dv.squared_norm(), 0.0, 1.0, lipschitz_of_f1=1.0)
    with pytest.raises(BoundViolation):
        dv.euclidean_envelope(dv.squared_norm(), 0.0, 1.0, alpha=3.0)
    with pytest.raises(ValueError):
        dv.euclidean_envelope(dv.squared_norm(), 0.0, 1.0)


# -- custom generators -----------------------------------------------------------

def test_custom_finite_differences_match_analytic():
    x = np.linspace(-2, 2, 41)
    only_f = dv.custom(lambda t: np.exp(t) + t**4)
    assert np.allclose(only_f.f1(x), np.exp(x) + 4 * x**3, rtol=1e-6)
    assert np.allclose(only_f.f2(x), np.exp(x) + 12 * x**2, rtol=1e-6, atol=1e-6)
    with_f1 = dv.custom(lambda t: np.exp(t) + t**4, f1=lambda t: np.exp(t) + 4 * t**3)
    assert np.allclose(with_f1.f2(x), np.exp(x) + 12 * x**2, rtol=1e-6, atol=1e-6)


def test_custom_third_derivative_fallback():
    fn = dv.custom(lambda t: t**4, f1=lambda t: 4 * t**3, f2=lambda t: 12 * t**2)
    assert float(fn.third(2.0)) == pytest.approx(48.0, rel=1e-5)


def test_affine_shift_leaves_divergence_unchanged():
    base = dv.custom(lambda t: np.cosh(t), f1=np.sinh, f2=np.cosh)
    shifted = dv.custom(lambda t: np.cosh(t) + 3.0 * t - 7.0, f1=lambda t: np.sinh(t) + 3.0, f2=np.cosh)
    rng = np.random.default_rng(3)
    for xi, x in rng.uniform(-3, 3, size=(50, 2)):
        assert abs(dv.phi(base, xi, x) - dv.phi(shifted, xi, x)) <= 1e-12 * (1 + dv.phi(base, xi, x))


# -- properties ------------------------------------------------------------------

case_st = st.sampled_from(CASES)


@st.composite
def pair_in_domain(draw):
    name, spec, (a, b) = draw(case_st)
    xi = draw(st.floats(a, b))
    x = draw(st.floats(a, b))
    return build(spec), xi, x


@given(pair_in_domain())
def test_nonnegative_and_separating(args):
    fn, xi, x = args
    val = dv.phi(fn, xi, x)
    assert val >= 0
    if val <= 1e-15:
        assert abs(xi - x) <= 1e-6 * max(1.0, abs(x))
    if xi == x:
        assert val == 0


@given(pair_in_domain(), st.floats(0.05, 0.95))
def test_convex_in_first_argument(args, s):
    fn, xi1, x = args
    xi2 = x + (xi1 - x) * s + 0.3 * (1 - s)
    assume(bool(dv.in_domain(fn, xi2)))
    mid = 0.5 * (xi1 + xi2)
    lhs = dv.phi(fn, mid, x)
    rhs = 0.5 * (dv.phi(fn, xi1, x) + dv.phi(fn, xi2, x))
    assert lhs <= rhs + 1e-12 * (1 + rhs)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_ray_monotonicity(case):
    _, spec, (a, b) = case
    fn = build(spec)
    xi = 0.5 * (a + b)
    right = np.linspace(xi, b, 60)[1:]
    left = np.linspace(a, xi, 60)[:-1]
    assert np.all(np.diff(fn.divergence(xi, right)) > 0)
    assert np.all(np.diff(fn.divergence(xi, left)) < 0)


@given(st.floats(0.1, 4.0), st.floats(-6, 6), st.floats(-6, 6))
def test_soft_butterfly_is_twice_softplus(a, xi, x):
    lhs = dv.phi(dv.soft_butterfly(a), xi, x)
    rhs = 2.0 * dv.phi(dv.softplus(2.0 * a), xi, x)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


@given(pair_in_domain(), st.floats(0, 1))
def test_three_point_identity(args, t):
    fn, u, w = args
    v = u + t * (w - u)
    assume(bool(dv.in_domain(fn, v)))
    assert abs(dv.three_point_residual(fn, u, v, w)) <= 1e-12 * (1 + dv.phi(fn, u, w))
