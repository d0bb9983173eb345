import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from bregquant import distribution as ds
from bregquant import divergence as dv
from bregquant.errors import DomainError, QuadratureError
from bregquant.quadrature import DEFAULT_QUADRATURE, BaseRule, QuadratureConfig, integrate, integrate_scalar

Q = DEFAULT_QUADRATURE


# -- quadrature ------------------------------------------------------------------

@pytest.mark.parametrize("rule", list(BaseRule))
def test_polynomial_and_smooth_integrals(rule):
    q = QuadratureConfig(base_rule=rule)
    assert integrate_scalar(lambda x: x**3, 0.0, 2.0, q) == pytest.approx(4.0, rel=1e-12)
    assert integrate_scalar(np.cos, 0.0, math.pi / 2, q) == pytest.approx(1.0, rel=1e-10)


def test_log_endpoint_singularity_terminates():
    val = integrate_scalar(lambda x: -np.log(x), 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_vectorized_matches_scalar():
    lo = np.array([0.0, 0.5, 1.0, 2.0])
    hi = np.array([0.5, 1.0, 2.0, 2.0])
    out = integrate(lambda x, _o: np.stack([np.exp(x), x * np.exp(x)]), lo, hi)
    assert out.shape == (2, 4)
    assert np.allclose(out[0], np.exp(hi) - np.exp(lo), rtol=1e-12)
    assert out[0, 3] == 0.0


def test_quadrature_errors():
    with pytest.raises(QuadratureError):
        integrate_scalar(lambda x: 1.0 / np.abs(x - 0.3) ** 1.5, 0.0, 1.0, QuadratureConfig(max_depth=5))
    with pytest.raises(QuadratureError):
        integrate(lambda x, _o: x, [1.0], [0.0])
    with pytest.raises(QuadratureError):
        integrate(lambda x, _o: x, [0.0], [math.inf])


@pytest.mark.parametrize("kw", [{"abs_tol": 0}, {"rel_tol": -1}, {"max_depth": 0}])
def test_quadrature_config_validation(kw):
    with pytest.raises(ValueError):
        QuadratureConfig(**kw)


# -- densities -------------------------------------------------------------------

def test_cell_moments_uniform():
    u = ds.uniform()
    assert ds.cell_moments(u, Q, 0.0, 0.5) == pytest.approx((0.5, 0.125), rel=1e-12)
    assert ds.cell_moments(u, Q, 0.3, 0.3) == (0.0, 0.0)


def test_cell_moments_half_normal():
    d = ds.truncated_gaussian(0.0, 1.0, -8.0, 8.0)
    mass, first = ds.cell_moments(d, Q, -8.0, 0.0)
    ref = mp.quad(lambda t: t * mp.npdf(t), [-8, 0]) / (mp.ncdf(8) - mp.ncdf(-8))
    assert mass == pytest.approx(0.5, abs=1e-12)
    assert first == pytest.approx(float(ref), rel=1e-10)
    assert first == pytest.approx(-1 / math.sqrt(2 * math.pi), rel=1e-9)


def test_cell_moments_rejects_outside_support():
    with pytest.raises(DomainError):
        ds.cell_moments(ds.uniform(), Q, -0.1, 0.5)


@pytest.mark.parametrize("x_i,r,expected", [
    (0.5, 2, (1.0, 0.5)),
    (0.5, 4, (1 / 12, 1 / 24)),
    (0.0, 4, (1 / 3, 1 / 4)),
])
def test_weighted_cell_moments(x_i, r, expected):
    out = ds.weighted_cell_moments(ds.uniform(), Q, dv.squared_norm(), x_i, r, 0.0, 1.0)
    assert out == pytest.approx(expected, rel=1e-12)


def test_weighted_cell_moments_domain():
    with pytest.raises(DomainError):
        ds.weighted_cell_moments(ds.uniform(-1.0, 1.0), Q, dv.itakura_saito(), 0.5, 4, -1.0, 1.0)


def test_weighted_moments_r2_equals_plain():
    d = ds.truncate_support(ds.gaussian(), 1e-12)
    a = ds.weighted_cell_moments(d, Q, dv.softplus(1.0), 0.3, 2, -1.0, 1.5)
    b = ds.cell_moments(d, Q, -1.0, 1.5)
    assert a == pytest.approx(b, rel=1e-12)


def test_truncate_support_width():
    d = ds.truncate_support(ds.gaussian(), 1e-12)
    assert d.support == pytest.approx((-7.1305, 7.1305), abs=1e-4)
    assert d.support[1] == pytest.approx(-special.ndtri(0.5e-12), rel=1e-14)
    assert d.total_mass_defect == 1e-12


def test_truncate_support_recovers_8_sigma():
    tail = 2 * special.ndtr(-8.0)
    d = ds.truncate_support(ds.gaussian(), tail)
    assert d.support == pytest.approx((-8.0, 8.0), rel=1e-12)


def test_truncate_support_rejects_bounded():
    with pytest.raises(ValueError):
        ds.truncate_support(ds.uniform(), 1e-6)
    with pytest.raises(ValueError):
        ds.truncate_support(ds.gaussian(), 0.7)


@pytest.mark.parametrize("d", [
    ds.uniform(-1.0, 3.0),
    ds.truncate_support(ds.gaussian(1.0, 2.0), 1e-12),
    ds.truncated_gaussian(0.0, 1.0, 0.0, 7.0),
    ds.truncated_gaussian(8.0, 1.0, 1e-12, 15.0),
])
def test_normalization(d):
    mass, _ = ds.cell_moments(d, Q, d.a, d.b)
    assert mass == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("d", [ds.uniform(), ds.gaussian(0.3, 2.0)])
def test_log_concavity_probe(d):
    grid = np.linspace(-5, 5, 1001) if not d.bounded else np.linspace(d.a, d.b, 1001)
    assert np.all(np.diff(d.dlog_h(grid)) <= 0)


@given(st.floats(-7.0, 7.0), st.floats(0.0, 1.0))
def test_adjacent_cells_add_up(lo, frac):
    d = ds.truncate_support(ds.gaussian(), 1e-12)
    hi = lo + (7.13 - lo) * 0.999
    mid = lo + frac * (hi - lo)
    left = np.array(ds.cell_moments(d, Q, lo, mid))
    right = np.array(ds.cell_moments(d, Q, mid, hi))
    whole = np.array(ds.cell_moments(d, Q, lo, hi))
    assert np.all(np.abs(left + right - whole) <= 2 * np.maximum(Q.abs_tol, Q.rel_tol * np.abs(whole)))


def test_custom_density_is_renormalized():
    d = ds.custom_density(lambda x: 3.0 * np.exp(-x), (0.0, 2.0))
    assert ds.cell_moments(d, Q, 0.0, 2.0)[0] == pytest.approx(1.0, abs=1e-10)
    assert d.dlog_h_approximate
    assert float(d.dlog_h(1.0)) == pytest.approx(-1.0, rel=1e-6)


def test_quantiles():
    assert ds.quantile(ds.gaussian(), 0.75) == pytest.approx(special.ndtri(0.75), abs=1e-12)
    assert ds.quantile(ds.uniform(), 0.125) == pytest.approx(0.125, abs=1e-14)


def test_density_from_spec():
    d = ds.density_from_spec({"kind": "Gaussian", "mu": 0, "sigma": 1, "tail_mass": 1e-12})
    assert d.kind == "TruncatedGaussian"
    with pytest.raises(DomainError):
        ds.density_from_spec({"kind": "Uniform", "a": 0, "b": 1, "c": 2})
    with pytest.raises(DomainError):
        ds.density_from_spec({"kind": "Cauchy"})


# -- 2D sampling -----------------------------------------------------------------

def test_sampling_is_deterministic():
    desc = ds.Gaussian2D()
    a = ds.sample_2d(desc, 4, 7).points
    b = ds.sample_2d(desc, 4, 7).points
    assert np.array_equal(a, b)
    assert not np.array_equal(a, ds.sample_2d(desc, 4, 8).points)


def test_sample_mean():
    s = ds.sample_2d(ds.Gaussian2D(), 100_000, 1)
    # 3 sigma / sqrt(n) with sigma = 1/2
    assert np.all(np.abs(s.points.mean(axis=0) - [0.5, 1.0]) < 0.01)
    assert np.allclose(np.cov(s.points.T), 0.25 * np.eye(2), atol=0.01)


def test_positive_quadrant():
    s = ds.sample_2d(ds.Gaussian2D(positive_quadrant=True), 1000, 3)
    assert len(s) == 1000
    assert np.all(s.points > 0)
