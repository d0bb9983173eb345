"""Closed-form Bregman-Voronoi geometry on the line.

For codes ``u < v`` the set of points closer to ``u`` than to ``v`` (in the
sense of ``phi_F(., u) < phi_F(., v)``) is a half-line ending at

    phi(u, v) = (F(u) - F(v) - u F'(u) + v F'(v)) / (F'(v) - F'(u)),

so the cells of an ordered codebook are intervals.  This module also
provides the partial derivatives of ``phi`` and the quantities ``psi`` and
``Phi`` that control the Hessian of the distortion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import BregmanFunction, check_domain
from .errors import DegenerateBoundary, DomainError, OrderingError

# relative gap below which the exact boundary formula is replaced by its expansion
NEAR_DIAGONAL = 1e-7
EQUAL_DIVERGENCE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Codebook1D:
    """Strictly increasing codes ``x_1 < ... < x_n``."""

    codes: np.ndarray

    def __post_init__(self):
        codes = np.array(self.codes, dtype=float).ravel()
        if codes.size == 0:
            raise OrderingError("a codebook needs at least one code")
        if not np.all(np.isfinite(codes)):
            raise OrderingError("codes must be finite")
        if np.any(np.diff(codes) <= 0):
            raise OrderingError("codes must be strictly increasing")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def n(self) -> int:
        return self.codes.size

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Codebook1D({np.array2string(self.codes, precision=6)})"


@dataclass(frozen=True, eq=False)
class CellBoundaries:
    """Cut points ``a = c_0 <= c_1 <= ... <= c_n = b``; cell ``i`` is ``[c_i, c_{i+1}]``.

    ``clamped`` marks interior cuts that fell outside ``[a, b]`` and were
    moved onto the endpoint.  ``equal_divergence_defect`` is the largest
    normalized gap ``|phi(c, x_i) - phi(c, x_{i+1})| / (1 + phi(c, x_i))``.
    """

    cuts: np.ndarray
    clamped: tuple[int, ...] = ()
    equal_divergence_defect: float = 0.0

    def __post_init__(self):
        cuts = np.array(self.cuts, dtype=float).ravel()
        cuts.setflags(write=False)
        object.__setattr__(self, "cuts", cuts)

    @property
    def left(self) -> np.ndarray:
        return self.cuts[:-1]

    @property
    def right(self) -> np.ndarray:
        return self.cuts[1:]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.cuts)


def _scale(u, v):
    return np.maximum(1.0, np.maximum(np.abs(u), np.abs(v)))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
# pairs closer than this fraction of their scale (and of the distance to the
# domain boundary) are evaluated through integrals of F''
_CLOSE = 0.05


def gap_terms(fn: BregmanFunction, lo, hi):
    """``phi_F(lo, hi)``, ``phi_F(hi, lo)`` and ``F'(hi) - F'(lo)`` for ``lo < hi``.

    The closed forms cancel catastrophically as ``hi - lo -> 0``.  For close
    pairs the three quantities are computed instead from
    ``int (t - lo) F''``, ``int (hi - t) F''`` and ``int F''`` over
    ``[lo, hi]`` with a fixed 16-point Gauss-Legendre rule, which keeps
    full relative accuracy.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    p_lh = np.asarray(fn.divergence(lo, hi), dtype=float)
    p_hl = np.asarray(fn.divergence(hi, lo), dtype=float)
    dfp = np.asarray(fn.f1(hi) - fn.f1(lo), dtype=float)
    gap = hi - lo
    room = np.minimum(lo - fn.lo, fn.hi - hi)
    close = (gap <= _CLOSE * np.minimum(_scale(lo, hi), room)) & (gap > 0)
    if np.any(close):
        a, b = np.broadcast_arrays(lo, hi)
        a, b = a[close], b[close]
        half = 0.5 * (b - a)
        t = 0.5 * (a + b)[:, None] + half[:, None] * _GL_NODES[None, :]
        w = half[:, None] * _GL_WEIGHTS[None, :] * fn.f2(t)
        p_lh, p_hl, dfp = (np.array(np.broadcast_to(z, close.shape)) for z in (p_lh, p_hl, dfp))
        p_lh[close] = np.sum(w * (t - a[:, None]), axis=1)
        p_hl[close] = np.sum(w * (b[:, None] - t), axis=1)
        dfp[close] = np.sum(w, axis=1)
    return p_lh, p_hl, dfp


def boundary_array(fn: BregmanFunction, u, v) -> np.ndarray:
    """Vectorized, unchecked boundary; ``u`` and ``v`` must differ elementwise."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)  # sorting makes the result exactly symmetric
    gap = hi - lo
    if np.any(gap == 0):
        raise DegenerateBoundary("boundary between a code and itself is undefined")
    near = gap < NEAR_DIAGONAL * _scale(lo, hi)
    p_lh, _, dfp = gap_terms(fn, lo, hi)
    if np.any(~near & (np.abs(dfp) < 1e-14 * (1.0 + np.abs(fn.f1(lo))))):
        raise DegenerateBoundary("F'(v) - F'(u) vanishes to working precision")
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = lo + p_lh / dfp
    if np.any(near):
        m = 0.5 * (lo + hi)
        approx = m + fn.third(m) * gap**2 / (12.0 * fn.f2(m))
        exact = np.where(near, approx, exact)
    return exact


def boundary(fn: BregmanFunction, u, v):
    """Point where ``phi_F(., u)`` and ``phi_F(., v)`` agree.

    Symmetric in ``(u, v)``.  Pairs closer than ``1e-7`` (relative) use the
    expansion ``m + F'''(m) (v-u)^2 / (12 F''(m))`` around the midpoint ``m``.

    Raises
    ------
    DegenerateBoundary
        If ``u == v`` or ``F'(v) - F'(u)`` is numerically zero.
    DomainError
        If a point lies outside the open domain.
    """
    check_domain(fn, u, v)
    out = boundary_array(fn, u, v)
    return float(out) if out.ndim == 0 else out


def cells(fn: BregmanFunction, cb: Codebook1D, support: tuple[float, float]) -> CellBoundaries:
    """Cut points of the Bregman-Voronoi partition of ``[a, b]`` induced by ``cb``.

    Raises
    ------
    DomainError
        If a code is outside ``(a, b)`` or outside the domain of ``fn``.
    OrderingError
        If the computed cuts are not monotone.
    """
    a, b = map(float, support)
    x = cb.codes
    if np.any(x <= a) or np.any(x >= b):
        raise DomainError(f"codes must lie strictly inside the support ({a}, {b})")
    check_domain(fn, x)
    return _cells_unchecked(fn, x, a, b)


def _cells_unchecked(fn, x, a, b) -> CellBoundaries:
    inner = boundary_array(fn, x[:-1], x[1:]) if x.size > 1 else np.empty(0)
    low, high = inner < a, inner > b
    clamped = tuple(int(i) + 1 for i in np.flatnonzero(low | high))
    inner = np.clip(inner, a, b)
    if np.any(np.diff(inner) < 0):
        raise OrderingError("cell boundaries are not monotone; codes too close for this generator")
    defect = 0.0
    if inner.size:
        dl = fn.divergence(inner, x[:-1])
        dr = fn.divergence(inner, x[1:])
        ok = np.array([i + 1 not in clamped for i in range(inner.size)])
        if np.any(ok):
            defect = float(np.max((np.abs(dl - dr) / (1.0 + dl))[ok]))
    cuts = np.concatenate([[a], inner, [b]])
    return CellBoundaries(cuts=cuts, clamped=clamped, equal_divergence_defect=defect)


def _partials_array(fn: BregmanFunction, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u == v):
        raise DegenerateBoundary("partials are undefined on the diagonal")
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    near = (hi - lo) < NEAR_DIAGONAL * _scale(lo, hi)
    p_lh, p_hl, dfp = gap_terms(fn, lo, hi)
    if np.any(~near & (np.abs(dfp) < 1e-14 * (1.0 + np.abs(fn.f1(lo))))):
        raise DegenerateBoundary("F'(v) - F'(u) vanishes to working precision")
    swap = u > v
    p_uv = np.where(swap, p_hl, p_lh)
    p_vu = np.where(swap, p_lh, p_hl)
    with np.errstate(divide="ignore", invalid="ignore"):
        du = fn.f2(u) * p_uv / dfp**2
        dv = fn.f2(v) * p_vu / dfp**2
    if np.any(near):
        m = 0.5 * (u + v)
        k = fn.third(m) * (v - u) / (6.0 * fn.f2(m))
        du = np.where(near, 0.5 - k, du)
        dv = np.where(near, 0.5 + k, dv)
    return du, dv


def boundary_partials(fn: BregmanFunction, u, v):
    """Partial derivatives of ``phi(u, v)`` in ``u`` and in ``v``.

    ``du = F''(u) phi_F(u, v) / (F'(v) - F'(u))**2`` and symmetrically for
    ``dv``; both are positive.
    """
    check_domain(fn, u, v)
    du, dv = _partials_array(fn, u, v)
    if du.ndim == 0:
        return float(du), float(dv)
    return du, dv


def psi_phi(fn: BregmanFunction, u, v):
    """``psi = d_u phi + d_v phi`` and ``Phi = F''(u) phi_F(u,v) + F''(v) phi_F(v,u) - (F'(v)-F'(u))**2``.

    The two are linked by ``psi = 1 + Phi / (F'(v) - F'(u))**2``.  ``psi <= 1``
    when ``F''`` is log-concave; a log-convex ``F''`` gives ``psi >= 1``.
    """
    check_domain(fn, u, v)
    du, dv = _partials_array(fn, u, v)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    p_lh, p_hl, dfp = gap_terms(fn, lo, hi)
    big = fn.f2(lo) * p_lh + fn.f2(hi) * p_hl - dfp**2
    psi = du + dv
    if np.ndim(psi) == 0:
        return float(psi), float(big)
    return psi, big


def psi_array(fn: BregmanFunction, u, v) -> np.ndarray:
    """Unchecked vectorized ``psi``."""
    du, dv = _partials_array(fn, u, v)
    return du + dv
