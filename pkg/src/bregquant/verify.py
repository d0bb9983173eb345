"""Checks of the structural guarantees on computed quantizers.

Everything here recomputes its inputs from scratch (cells, moments, the
distortion and ``E F(X)``) instead of reusing solver state, so a report
on a codebook is an independent audit of that codebook.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from .distortion import (
    STATIONARY_TOL,
    cell_integrals,
    distortion,
    expected_f,
    hessian_line_sums,
    hessian_matrix,
    prepare,
)
from .distribution import Density1D, working_density
from .divergence import BregmanFunction, LogCurvature
from .errors import NotStationary, ShapeError, ZeroWeightCell
from .geometry1d import Codebook1D, psi_array
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig
from .solver import SolverConfig, lloyd, weighted_lloyd

LOG_CURVATURE_RTOL = 1e-9


# ----------------------------------------------------------------------------
# Stationarity and the Pythagoras identity
# ----------------------------------------------------------------------------

def stationarity_report(fn: BregmanFunction, d: Density1D, cb: Codebook1D, r: float = 2.0,
                        q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``max_i |x_i - wmoment_i / wmass_i|`` (plain conditional means when ``r = 2``)."""
    if r < 2:
        raise ValueError("stationarity is defined here for r >= 2")
    wd, cl = prepare(fn, d, cb)
    wmass, wmom, _ = cell_integrals(fn, wd, cb.codes, cl.cuts, r, q, weighted=True)
    empty = wmass <= np.finfo(float).tiny
    if np.any(empty):
        raise ZeroWeightCell(f"cell(s) {np.flatnonzero(empty)} carry no weight")
    return float(np.max(np.abs(cb.codes - wmom / wmass)))


def _pythagoras_gap(fn, d, cb, q) -> tuple[float, float, float]:
    wd, cl = prepare(fn, d, cb)
    mass, _, contrib = cell_integrals(fn, wd, cb.codes, cl.cuts, 2.0, q)
    g = float(np.sum(contrib))
    rhs = expected_f(fn, wd, q) - float(np.sum(mass * fn.f(cb.codes)))
    return abs(g - rhs), g, rhs


def pythagoras_identity(fn: BregmanFunction, d: Density1D, cb: Codebook1D,
                        q: QuadratureConfig = DEFAULT_QUADRATURE,
                        stationary_tol: float = STATIONARY_TOL) -> float:
    """``|G_{2,n} - (E F(X) - sum_i P(C_i) F(x_i))|`` at a stationary codebook.

    At a fixed point of Lloyd's map the distortion equals the drop of
    ``E F`` under quantization.  The gap is first order in the stationarity
    residual, so the check is refused away from stationary points.
    """
    res = stationarity_report(fn, d, cb, 2.0, q)
    if res > stationary_tol:
        raise NotStationary(f"stationarity residual {res:.3e} exceeds {stationary_tol:.1e}")
    return _pythagoras_gap(fn, d, cb, q)[0]


# ----------------------------------------------------------------------------
# Uniqueness hypotheses
# ----------------------------------------------------------------------------

def _interior_grid(interval, size: int) -> np.ndarray:
    a, b = map(float, interval)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError("need a finite interval a < b")
    return a + (b - a) * (np.arange(size) + 0.5) / size


def classify_log_curvature(fn: BregmanFunction, interval, grid_size: int = 200) -> LogCurvature:
    """Sign pattern of the second differences of ``log F''`` on a uniform grid.

    An affine ``log F''`` (both concave and convex) is reported as
    ``LogConcave``.
    """
    x = _interior_grid(interval, grid_size)
    f2 = np.asarray(fn.f2(x), dtype=float)
    if np.any(f2 <= 0):
        raise ValueError("F'' must be positive on the interval")
    lf = np.log(f2)
    d2 = lf[2:] - 2.0 * lf[1:-1] + lf[:-2]
    tol = LOG_CURVATURE_RTOL * max(1.0, float(np.max(np.abs(lf))))
    if np.all(d2 <= tol):
        return LogCurvature.LOG_CONCAVE
    if np.all(d2 >= -tol):
        return LogCurvature.LOG_CONVEX
    return LogCurvature.NEITHER


def density_log_concave(d: Density1D, grid_size: int = 400) -> bool | None:
    """``True`` if ``dlog_h`` is non-increasing on a grid; ``None`` if it cannot be trusted."""
    if d.log_concave is not None:
        return d.log_concave
    if d.dlog_h is None or d.dlog_h_approximate:
        return None
    wd = working_density(d)
    g = np.asarray(wd.dlog_h(_interior_grid(wd.support, grid_size)), dtype=float)
    tol = LOG_CURVATURE_RTOL * max(1.0, float(np.max(np.abs(g))))
    return bool(np.all(np.diff(g) <= tol))


@dataclass(frozen=True)
class TrushkinVerdict:
    """``UniqueGuaranteed`` (with the ``F''`` branch) or ``Inconclusive``.

    Never "not unique": the criterion only ever certifies uniqueness.
    """

    unique: bool
    branch: str | None = None  # "LogConcaveF2" or "LogConvexF2"
    reasons: tuple[str, ...] = ()
    f_positive: bool | None = None

    def __str__(self) -> str:
        return f"UniqueGuaranteed({self.branch})" if self.unique else "Inconclusive"


def _min_of_convex(fn: BregmanFunction, a: float, b: float) -> float:
    """Minimum of the convex ``F`` on ``[a, b]``, located through the sign of ``F'``."""
    fa, fb = float(fn.f1(a)), float(fn.f1(b))
    if fa >= 0:
        return float(fn.f(a))
    if fb <= 0:
        return float(fn.f(b))
    return float(fn.f(brentq(lambda t: float(fn.f1(t)), a, b, xtol=1e-14)))


def trushkin_check(fn: BregmanFunction, d: Density1D, working_interval=None,
                   grid_size: int = 200) -> TrushkinVerdict:
    """Check the uniqueness hypotheses: log-concave density, ``F'' > 0`` and
    ``log F''`` concave or convex on the working interval.

    Built-in generators use their analytic curvature label; custom ones are
    classified numerically.  Positivity of ``F`` itself is reported in
    ``f_positive`` but does not enter the verdict: adding an affine function
    to ``F`` leaves the divergence unchanged and can always make ``F``
    positive on a bounded interval.
    """
    wd = working_density(d)
    interval = wd.support if working_interval is None else tuple(map(float, working_interval))
    reasons = []
    lc = density_log_concave(d)
    if lc is None:
        reasons.append("density log-concavity unknown (approximate or missing dlog_h)")
    elif not lc:
        reasons.append("density is not log-concave")
    x = _interior_grid(interval, grid_size)
    f2 = np.asarray(fn.f2(x), dtype=float)
    f_pos = _min_of_convex(fn, x[0], x[-1]) > 0
    if np.any(f2 <= 0):
        reasons.append("F'' is not positive on the working interval")
        curv = LogCurvature.NEITHER
    elif fn.log_curvature in (LogCurvature.LOG_CONCAVE, LogCurvature.LOG_CONVEX):
        curv = fn.log_curvature
    else:
        curv = classify_log_curvature(fn, interval, grid_size)
    if curv is LogCurvature.NEITHER:
        reasons.append("log F'' is neither concave nor convex")
    if reasons:
        return TrushkinVerdict(False, None, tuple(reasons), f_pos)
    branch = "LogConcaveF2" if curv is LogCurvature.LOG_CONCAVE else "LogConvexF2"
    return TrushkinVerdict(True, branch, (), f_pos)


# ----------------------------------------------------------------------------
# psi scan, Gershgorin-type criterion, Hessian
# ----------------------------------------------------------------------------

def psi_scan(fn: BregmanFunction, interval, grid_size: int = 50) -> float:
    """Largest ``psi(u, v)`` over pairs ``u < v`` of a ``grid_size``-point grid."""
    x = _interior_grid(interval, grid_size)
    i, j = np.triu_indices(grid_size, k=1)
    return float(np.max(psi_array(fn, x[i], x[j])))


def _as_tridiagonal(A) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ShapeError("expected a nonempty square matrix")
    n = A.shape[0]
    band = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) <= 1
    if np.any(A[~band] != 0):
        raise ShapeError("matrix is not tridiagonal")
    if not np.array_equal(A, A.T):
        raise ShapeError("matrix is not symmetric")
    return np.diag(A).copy(), np.diag(A, 1).copy()


def gershgorin_hypotheses(diag, off) -> bool:
    """Sign and line-sum conditions on a symmetric tridiagonal matrix."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    lines = diag.copy()
    lines[:-1] += off
    lines[1:] += off
    return bool(
        np.all(diag >= 0)
        and np.all(off < 0)
        and np.all(lines >= 0)
        and (lines[0] > 0 or lines[-1] > 0)
    )


def gershgorin_positive(A) -> bool:
    """``True`` iff ``a_ii >= 0``, ``a_{i,i+1} < 0``, every line sum is ``>= 0``
    and the first or last line sum is ``> 0``; these force positive eigenvalues.

    Raises
    ------
    ShapeError
        If ``A`` is not square, symmetric and tridiagonal.
    """
    return gershgorin_hypotheses(*_as_tridiagonal(A))


def tridiagonal_eigen_min(diag, off) -> float:
    diag = np.asarray(diag, dtype=float)
    if diag.size == 1:
        return float(diag[0])
    return float(eigvalsh_tridiagonal(diag, np.asarray(off, dtype=float), select="i",
                                      select_range=(0, 0))[0])


def hessian_positivity_at(fn: BregmanFunction, d: Density1D, cb: Codebook1D,
                          q: QuadratureConfig = DEFAULT_QUADRATURE,
                          stationary_tol: float = STATIONARY_TOL) -> tuple[np.ndarray, float]:
    """Line sums and smallest eigenvalue of the right Hessian of ``G_{2,n}``.

    Raises
    ------
    NotStationary
        If ``cb`` is not stationary within ``stationary_tol``.
    """
    sums = hessian_line_sums(fn, d, cb, q, stationary_tol)
    diag, off, _ = hessian_matrix(fn, d, cb, q, stationary_tol)
    return sums, tridiagonal_eigen_min(diag, off)


# ----------------------------------------------------------------------------
# Symmetry and level monotonicity
# ----------------------------------------------------------------------------

def symmetry_check(cb: Codebook1D | Sequence[float], center: float) -> float:
    """``max_i |(x_i - c) + (x_{n+1-i} - c)|``."""
    x = np.asarray(cb.codes if isinstance(cb, Codebook1D) else cb, dtype=float)
    return float(np.max(np.abs((x - center) + (x[::-1] - center))))


def level_monotonicity(fn: BregmanFunction, d: Density1D, n_max: int, r: float = 2.0,
                       q: QuadratureConfig = DEFAULT_QUADRATURE,
                       cfg: SolverConfig = SolverConfig()) -> list[float]:
    """Distortion of the converged quantizer at every level ``1..n_max``."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    out = []
    for n in range(1, n_max + 1):
        if r == 2:
            cb, _, _ = lloyd(fn, d, n, q, cfg)
        else:
            cb, _, _ = weighted_lloyd(fn, d, n, r, q, cfg)
        out.append(distortion(fn, d, cb, r, q).g)
    return out


def strictly_decreasing(values: Sequence[float]) -> bool:
    v = np.asarray(values, dtype=float)
    positive = v[:-1] > 0
    return bool(np.all(np.diff(v)[positive] < 0))


# ----------------------------------------------------------------------------
# Combined report
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    stationarity_sup_residual: float
    stationary: bool
    distortion: float
    pythagoras_gap: float
    trushkin_verdict: str
    trushkin_reasons: list[str]
    f_positive: bool | None
    line_sums: list[float]
    eigen_min: float
    hessian_asymmetry: float
    symmetry_center: float
    symmetry_defect: float
    psi_max: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_codebook(fn: BregmanFunction, d: Density1D, cb: Codebook1D,
                    q: QuadratureConfig = DEFAULT_QUADRATURE,
                    stationary_tol: float = STATIONARY_TOL, psi_grid: int = 50,
                    r: float = 2.0) -> VerificationReport:
    """Every diagnostic at once, evaluated even when ``cb`` is not stationary.

    The stationarity residual refers to order ``r``; the Pythagoras gap,
    line sums and Hessian are the ``r = 2`` quantities.  Away from
    stationary points these are still computed from their formulas and
    ``stationary`` says whether the guarantees attached to them apply.
    """
    wd = working_density(d)
    res = stationarity_report(fn, wd, cb, r, q)
    gap, g, _ = _pythagoras_gap(fn, wd, cb, q)
    verdict = trushkin_check(fn, wd)
    sums = hessian_line_sums(fn, wd, cb, q, math.inf)
    diag, off, asym = hessian_matrix(fn, wd, cb, q, math.inf)
    center = wd.center if wd.center is not None else 0.5 * (wd.a + wd.b)
    return VerificationReport(
        stationarity_sup_residual=res,
        stationary=res <= stationary_tol,
        distortion=g,
        pythagoras_gap=gap,
        trushkin_verdict=str(verdict),
        trushkin_reasons=list(verdict.reasons),
        f_positive=verdict.f_positive,
        line_sums=sums.tolist(),
        eigen_min=tridiagonal_eigen_min(diag, off),
        hessian_asymmetry=asym,
        symmetry_center=float(center),
        symmetry_defect=symmetry_check(cb, center),
        psi_max=psi_scan(fn, wd.support, psi_grid),
        extra={"r": float(r)},
    )
