import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bregquant import divergence as dv
from bregquant import geometry1d as g
from bregquant.errors import DegenerateBoundary, DomainError, OrderingError

import oracles
from catalog import CASES, IDS, build, params


def test_boundary_squared_norm_midpoint():
    assert g.boundary(dv.squared_norm(), 0.2, 0.8) == pytest.approx(0.5, abs=1e-15)


def test_boundary_exponential():
    ref = oracles.boundary_by_bisection(oracles.generator("Exponential", a=1), 0, mp.log(2))
    out = g.boundary(dv.exponential(1.0), 0.0, math.log(2))
    assert out == pytest.approx(2 * math.log(2) - 1, rel=1e-13)
    assert out == pytest.approx(float(ref), rel=1e-13)


def test_boundary_softplus_even_curvature():
    ref = oracles.boundary_by_bisection(oracles.generator("SoftPlus", a=1), -1.3, 1.3)
    assert abs(float(ref)) < 1e-30
    assert g.boundary(dv.softplus(1.0), -1.3, 1.3) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_boundary_against_root_finding(case):
    _, spec, (a, b) = case
    fn = build(spec)
    F = oracles.generator(spec["kind"], **params(spec))
    rng = np.random.default_rng(11)
    for u, v in rng.uniform(a, b, size=(6, 2)):
        ref = float(oracles.boundary_by_bisection(F, u, v))
        assert g.boundary(fn, u, v) == pytest.approx(ref, rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_boundary_is_symmetric_and_between(case):
    _, spec, (a, b) = case
    fn = build(spec)
    rng = np.random.default_rng(5)
    u, v = rng.uniform(a, b, size=(2, 200))
    keep = u != v
    u, v = u[keep], v[keep]
    c = g.boundary(fn, u, v)
    assert np.array_equal(c, g.boundary(fn, v, u))
    assert np.all((c > np.minimum(u, v)) & (c < np.maximum(u, v)))


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_diagonal_limit(case):
    _, spec, (a, b) = case
    fn = build(spec)
    u = a + 0.37 * (b - a)
    errs = []
    for h in (1e-4, 1e-5):
        c = g.boundary(fn, u, u + h)
        errs.append(abs(c - (u + h / 2)))
        assert c == pytest.approx(u, abs=2 * h)
    # second order: the offset from the midpoint shrinks like h**2
    assert errs[1] <= 0.02 * errs[0] + 1e-15


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_near_diagonal_branch_is_continuous(case):
    _, spec, (a, b) = case
    fn = build(spec)
    u = a + 0.61 * (b - a)
    scale = max(1.0, abs(u))
    h_in = 0.99e-7 * scale   # expansion
    h_out = 1.01e-7 * scale  # exact formula
    c_in = g.boundary(fn, u, u + h_in)
    c_out = g.boundary(fn, u, u + h_out)
    assert (c_out - c_in) == pytest.approx((h_out - h_in) / 2, rel=1e-6)


def test_boundary_errors():
    with pytest.raises(DegenerateBoundary):
        g.boundary(dv.squared_norm(), 1.0, 1.0)
    with pytest.raises(DegenerateBoundary):
        g.boundary(dv.softplus(1.0), 40.0, 45.0)  # F' = 1 to working precision
    with pytest.raises(DomainError):
        g.boundary(dv.itakura_saito(), -1.0, 1.0)


@given(st.sampled_from(CASES), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_equal_divergence_characterization(case, s, t, w):
    _, spec, (a, b) = case
    fn = build(spec)
    u, v = a + (b - a) * min(s, t), a + (b - a) * max(s, t)
    assume(v - u > 1e-3 * (b - a))
    xi = a + (b - a) * w
    c = g.boundary(fn, u, v)
    du, dv_ = fn.divergence(xi, u), fn.divergence(xi, v)
    assume(abs(xi - c) > 1e-9 * max(1.0, abs(c)))
    assume(abs(du - dv_) > 1e-12 * (1 + du))
    assert (xi < c) == (du < dv_)


# -- cells -----------------------------------------------------------------------

@pytest.mark.parametrize("codes,cuts", [
    ([0.25, 0.75], [0.0, 0.5, 1.0]),
    ([1 / 8, 3 / 8, 5 / 8, 7 / 8], [0.0, 0.25, 0.5, 0.75, 1.0]),
])
def test_cells_squared_norm(codes, cuts):
    cl = g.cells(dv.squared_norm(), g.Codebook1D(codes), (0.0, 1.0))
    assert np.allclose(cl.cuts, cuts, atol=1e-15)
    assert cl.clamped == ()


def test_cells_kullback_leibler():
    fn = dv.kullback_leibler()
    cl = g.cells(fn, g.Codebook1D([0.5, 2.0]), (0.01, 10.0))
    ref = float(oracles.boundary_by_bisection(oracles.generator("KullbackLeibler"), 0.5, 2.0))
    c = cl.cuts[1]
    assert c == pytest.approx(ref, rel=1e-13)
    phi_l, phi_r = dv.phi(fn, c, 0.5), dv.phi(fn, c, 2.0)
    assert abs(phi_l - phi_r) <= 1e-10 * (1 + phi_l)
    assert cl.equal_divergence_defect <= 1e-10


def test_cells_errors():
    with pytest.raises(DomainError):
        g.cells(dv.squared_norm(), g.Codebook1D([0.5, 1.5]), (0.0, 1.0))
    with pytest.raises(OrderingError):
        g.Codebook1D([0.5, 0.4])
    with pytest.raises(OrderingError):
        g.Codebook1D([0.5, 0.5])


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_cells_contain_their_codes(case):
    _, spec, (a, b) = case
    fn = build(spec)
    rng = np.random.default_rng(2)
    codes = np.sort(rng.uniform(a, b, 12))
    cl = g.cells(fn, g.Codebook1D(codes), (a, b))
    assert np.all(np.diff(cl.cuts) >= 0)
    assert np.all((cl.left <= codes) & (codes <= cl.right))
    assert cl.equal_divergence_defect <= 1e-10


# -- partials, psi and Phi ---------------------------------------------------------

def test_partials_squared_norm():
    assert g.boundary_partials(dv.squared_norm(), 0.2, 0.8) == pytest.approx((0.5, 0.5), rel=1e-14)


@pytest.mark.parametrize("fn,u,v", [
    (dv.softplus(1.0), -1.0, 1.0),
    (dv.itakura_saito(), 0.5, 2.0),
    (dv.kullback_leibler(), 0.3, 1.7),
    (dv.exponential(-1.0), -0.4, 0.9),
])
def test_partials_against_finite_differences(fn, u, v):
    h = 1e-5
    fd_u = (g.boundary(fn, u + h, v) - g.boundary(fn, u - h, v)) / (2 * h)
    fd_v = (g.boundary(fn, u, v + h) - g.boundary(fn, u, v - h)) / (2 * h)
    du, dv_ = g.boundary_partials(fn, u, v)
    assert du > 0 and dv_ > 0
    assert du == pytest.approx(fd_u, rel=1e-6)
    assert dv_ == pytest.approx(fd_v, rel=1e-6)


def test_psi_phi_quadratic():
    psi, big = g.psi_phi(dv.squared_norm(), 0.2, 0.8)
    assert psi == pytest.approx(1.0, abs=1e-15)
    assert big == pytest.approx(0.0, abs=1e-15)


def test_psi_phi_softplus_log_concave_branch():
    psi, big = g.psi_phi(dv.softplus(1.0), -0.5, 1.5)
    assert psi <= 1.0 and big <= 0.0


def test_psi_phi_itakura_saito_exceeds_one():
    # F'' = 1/x^2 is log-convex; direct evaluation gives psi > 1 and Phi > 0
    F = oracles.generator("ItakuraSaito")
    u, v = mp.mpf("0.3"), mp.mpf(2)
    d1 = mp.diff(F, v) - mp.diff(F, u)
    big_ref = mp.diff(F, u, 2) * oracles.phi(F, u, v) + mp.diff(F, v, 2) * oracles.phi(F, v, u) - d1**2
    psi_ref = 1 + big_ref / d1**2
    psi, big = g.psi_phi(dv.itakura_saito(), 0.3, 2.0)
    assert psi == pytest.approx(float(psi_ref), rel=1e-12)
    assert big == pytest.approx(float(big_ref), rel=1e-12)
    assert psi > 1.5 and big > 4.5


@pytest.mark.parametrize("case", CASES, ids=IDS)
def test_psi_phi_relation(case):
    _, spec, (a, b) = case
    fn = build(spec)
    rng = np.random.default_rng(9)
    u, v = np.sort(rng.uniform(a, b, size=(2, 100)), axis=0)
    psi, big = g.psi_phi(fn, u, v)
    dfp = fn.f1(v) - fn.f1(u)
    assert np.allclose(psi, 1 + big / dfp**2, rtol=1e-10, atol=0)


def test_partials_near_diagonal_are_half():
    du, dv_ = g.boundary_partials(dv.kullback_leibler(), 1.0, 1.0 + 1e-9)
    assert du == pytest.approx(0.5, abs=1e-8) and dv_ == pytest.approx(0.5, abs=1e-8)
