"""Distortion of a 1D codebook, its gradient, the F-variance and Hessian line sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import (
    Density1D,
    _split_at,
    check_support_in_domain,
    moments,
    weighted_moments,
    working_density,
)
from .divergence import BregmanFunction, check_domain
from .errors import DegenerateCodes, DomainError, NotStationary
from .geometry1d import CellBoundaries, Codebook1D, _cells_unchecked, _partials_array, psi_array
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate, integrate_scalar

STATIONARY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DistortionReport:
    """``g = G_{r,n}``, ``e = g**(1/r)`` and per-cell ``(mass, contribution)``."""

    g: float
    e: float
    r: float
    mass: np.ndarray
    contribution: np.ndarray
    cells: CellBoundaries
    gradient: np.ndarray | None = None

    @property
    def per_cell(self) -> list[tuple[float, float]]:
        return list(zip(self.mass.tolist(), self.contribution.tolist()))


def prepare(fn: BregmanFunction, d: Density1D, cb: Codebook1D):
    """Working (bounded) density and cells, with domain checks."""
    wd = working_density(d)
    check_support_in_domain(fn, wd)
    x = cb.codes
    if np.any(x <= wd.a) or np.any(x >= wd.b):
        raise DomainError(f"codes must lie strictly inside the support {wd.support}")
    check_domain(fn, x)
    return wd, _cells_unchecked(fn, x, wd.a, wd.b)


def cell_integrals(fn: BregmanFunction, wd: Density1D, x: np.ndarray, cuts: np.ndarray,
                   r: float, q: QuadratureConfig, weighted: bool = False):
    """Per-cell ``(mass, first moment, int phi^(r/2) dP)`` in one adaptive pass.

    With ``weighted`` the mass and moment carry the weight
    ``phi_F(xi, x_i)^(r/2 - 1)`` of the generalized master equation.  Cells
    are split at their codes so that kinks of ``phi^(r/2)`` sit on panel
    endpoints.
    """
    n = x.size
    a, b = _split_at(cuts[:-1], cuts[1:], x)
    own = np.concatenate([x, x])
    half = 0.5 * r

    def g(t, owner):
        h = wd.pdf(t)
        p = fn.divergence(t, own[owner][:, None])
        if weighted and half != 1.0:
            w = p ** (half - 1.0) * h
            return np.stack([w, t * w, p * w])
        return np.stack([h, t * h, (p if half == 1.0 else p**half) * h])

    out = integrate(g, a, b, q)
    out = out[:, :n] + out[:, n:]
    return out[0], out[1], out[2]


def distortion(fn: BregmanFunction, d: Density1D, cb: Codebook1D, r: float = 2.0,
               q: QuadratureConfig = DEFAULT_QUADRATURE, *, with_gradient: bool = False
               ) -> DistortionReport:
    """``G_{r,n} = sum_i int_{C_i} phi_F(xi, x_i)^(r/2) P(dxi)``.

    Unbounded densities are truncated (see ``working_density``) first.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    wd, cl = prepare(fn, d, cb)
    mass, _, contrib = cell_integrals(fn, wd, cb.codes, cl.cuts, r, q)
    g = float(np.sum(contrib))
    grad = _gradient(fn, wd, cb.codes, cl.cuts, r, q) if with_gradient else None
    return DistortionReport(g=g, e=g ** (1.0 / r), r=r, mass=mass, contribution=contrib,
                            cells=cl, gradient=grad)


def f_variance(fn: BregmanFunction, d: Density1D, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``E F(X) - F(E X)``, the optimal one-level distortion."""
    wd = working_density(d)
    check_support_in_domain(fn, wd)
    mass, first = moments(wd, [wd.a], [wd.b], q)
    m = float(first[0] / mass[0])
    check_domain(fn, m)
    return expected_f(fn, wd, q) - float(fn.f(m))


def expected_f(fn: BregmanFunction, d: Density1D, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``E F(X)`` by direct quadrature."""
    wd = working_density(d)
    check_support_in_domain(fn, wd)
    return integrate_scalar(lambda t: fn.f(t) * wd.pdf(t), wd.a, wd.b, q)


def _check_distinct(x: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(x))))
    if x.size > 1 and np.min(np.diff(x)) < 1e-10 * scale:
        raise DegenerateCodes("codes closer than 1e-10 (relative)")


def _gradient(fn, wd, x, cuts, r, q):
    wmass, wmom = weighted_moments(wd, fn, x, r, cuts[:-1], cuts[1:], q)
    return 0.5 * r * fn.f2(x) * (x * wmass - wmom)


def gradient(fn: BregmanFunction, d: Density1D, cb: Codebook1D, r: float = 2.0,
             q: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Gradient of ``G_{r,n}`` at ``cb``; refused for ``r < 2``.

    ``dG/dx_i = (r/2) F''(x_i) int_{C_i} (x_i - xi) phi_F(xi, x_i)^(r/2-1) P(dxi)``.
    """
    if r < 2:
        raise ValueError("the gradient is only provided for r >= 2")
    _check_distinct(cb.codes)
    wd, cl = prepare(fn, d, cb)
    return _gradient(fn, wd, cb.codes, cl.cuts, r, q)


def _line_terms(fn: BregmanFunction, wd: Density1D, x: np.ndarray, cuts: np.ndarray):
    """Boundary weights ``(c - x_i) h(c)`` on each side of each code."""
    inner = cuts[1:-1]
    hc = wd.pdf(inner)
    right = (inner - x[:-1]) * hc  # (c_{i+1/2} - x_i) h, for i < n
    left = (x[1:] - inner) * hc  # (x_{i+1} - c_{i+1/2}) h, for i+1 > 1
    return right, left


def _stationarity(fn, wd, x, cuts, q):
    mass, first = moments(wd, cuts[:-1], cuts[1:], q)
    return mass, float(np.max(np.abs(x - first / mass)))


def hessian_line_sums(fn: BregmanFunction, d: Density1D, cb: Codebook1D,
                      q: QuadratureConfig = DEFAULT_QUADRATURE,
                      stationary_tol: float = STATIONARY_TOL) -> np.ndarray:
    """Row sums of the right Hessian of ``G_{2,n}`` at a stationary codebook.

    Raises
    ------
    NotStationary
        If the master-equation residual exceeds ``stationary_tol``.
    """
    wd, cl = prepare(fn, d, cb)
    x = cb.codes
    mass, res = _stationarity(fn, wd, x, cl.cuts, q)
    if res > stationary_tol:
        raise NotStationary(f"stationarity residual {res:.3e} exceeds {stationary_tol:.1e}")
    out = mass.copy()
    if x.size > 1:
        right, left = _line_terms(fn, wd, x, cl.cuts)
        psi = psi_array(fn, x[:-1], x[1:])
        out[:-1] -= right * psi
        out[1:] -= left * psi
    return fn.f2(x) * out


def hessian_matrix(fn: BregmanFunction, d: Density1D, cb: Codebook1D,
                   q: QuadratureConfig = DEFAULT_QUADRATURE,
                   stationary_tol: float = STATIONARY_TOL):
    """Diagonal and off-diagonal of the tridiagonal right Hessian at a stationary point.

    The ``F'''`` term multiplies ``int_{C_i} (x_i - xi) dP``, which vanishes
    at stationary points and is dropped.  The off-diagonal is returned
    symmetrized; the raw asymmetry is reported as the third value.
    """
    wd, cl = prepare(fn, d, cb)
    x = cb.codes
    mass, res = _stationarity(fn, wd, x, cl.cuts, q)
    if res > stationary_tol:
        raise NotStationary(f"stationarity residual {res:.3e} exceeds {stationary_tol:.1e}")
    f2 = fn.f2(x)
    diag = mass.copy()
    if x.size == 1:
        return f2 * diag, np.empty(0), 0.0
    right, left = _line_terms(fn, wd, x, cl.cuts)
    du, dv = _partials_array(fn, x[:-1], x[1:])
    diag[:-1] -= right * du
    diag[1:] -= left * dv
    diag *= f2
    upper = -f2[:-1] * right * dv  # a_{i,i+1}
    lower = -f2[1:] * left * du  # a_{i+1,i}
    asym = float(np.max(np.abs(upper - lower)))
    return diag, 0.5 * (upper + lower), asym
