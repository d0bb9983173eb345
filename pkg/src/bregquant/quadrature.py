"""Vectorized adaptive quadrature over many intervals at once.

Every interval is refined by bisection; the value on an interval is the
two-halves estimate and its error the gap to the one-panel estimate.  An
interval is accepted when that gap is below its share of the absolute
tolerance (proportional to width) or below ``rel_tol`` times its value.
When every remaining gap of an integral fits in its total budget, the
integral is closed out, which lets endpoint singularities of ``log`` type
terminate without exhausting ``max_depth``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureError


class BaseRule(str, enum.Enum):
    GAUSS_LEGENDRE_15 = "GaussLegendre15"
    SIMPSON = "Simpson"


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_depth: int = 40
    base_rule: BaseRule = BaseRule.GAUSS_LEGENDRE_15

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        object.__setattr__(self, "base_rule", BaseRule(self.base_rule))


DEFAULT_QUADRATURE = QuadratureConfig()


@lru_cache(maxsize=None)
def _rule(base: BaseRule):
    if base is BaseRule.GAUSS_LEGENDRE_15:
        nodes, weights = np.polynomial.legendre.leggauss(15)
    else:
        nodes = np.array([-1.0, 0.0, 1.0])
        weights = np.array([1.0, 4.0, 1.0]) / 3.0
    return nodes, weights


def _panel(func, a, b, owner, nodes, weights):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(func(x, owner), dtype=float)
    if vals.ndim == 2:
        vals = vals[None]
    return (vals @ weights) * half[None, :]


def integrate(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lo,
    hi,
    q: QuadratureConfig = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Integrate ``func`` over each ``[lo[j], hi[j]]``.

    ``func(x, owner)`` receives nodes ``x`` of shape ``(K, M)`` and the index
    ``owner`` (shape ``(K,)``) of the integral each row belongs to.  It returns
    either ``(K, M)`` values or ``(P, K, M)`` for ``P`` integrands sharing the
    same partition.  The result has shape ``(P, J)``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("lo and hi must have the same shape")
    if np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)):
        raise QuadratureError("integration limits must be finite")
    if np.any(lo > hi):
        raise QuadratureError("lo must not exceed hi")
    nodes, weights = _rule(q.base_rule)
    J = lo.size
    width_total = np.abs(hi - lo)

    active = np.flatnonzero(hi > lo)
    a, b, owner = lo[active], hi[active], active
    depth = np.zeros(a.size, dtype=int)
    if a.size == 0:
        probe = np.asarray(func(np.full((1, nodes.size), lo[0]), np.zeros(1, dtype=int)))
        P = 1 if probe.ndim == 2 else probe.shape[0]
        return np.zeros((P, J))
    coarse = _panel(func, a, b, owner, nodes, weights)
    P = coarse.shape[0]
    result = np.zeros((P, J))
    err_done = np.zeros((P, J))
    while a.size:
        m = 0.5 * (a + b)
        left = _panel(func, a, m, owner, nodes, weights)
        right = _panel(func, m, b, owner, nodes, weights)
        fine = left + right
        if q.base_rule is BaseRule.SIMPSON:
            fine = fine + (fine - coarse) / 15.0
        err = np.abs(fine - coarse)
        share = q.abs_tol * (b - a) / width_total[owner]
        local_tol = np.maximum(share[None, :], q.rel_tol * np.abs(fine))
        ok = np.all(err <= local_tol, axis=0)

        if np.any(ok):
            np.add.at(result.T, owner[ok], fine[:, ok].T)
            np.add.at(err_done.T, owner[ok], err[:, ok].T)

        pending = ~ok
        if np.any(pending):
            # close out integrals whose outstanding error fits the global budget
            est = result.copy()
            np.add.at(est.T, owner[pending], fine[:, pending].T)
            outstanding = err_done.copy()
            np.add.at(outstanding.T, owner[pending], err[:, pending].T)
            budget = np.maximum(q.abs_tol, q.rel_tol * np.abs(est))
            closed = np.all(outstanding <= budget, axis=0)
            close_rows = pending & closed[owner]
            if np.any(close_rows):
                np.add.at(result.T, owner[close_rows], fine[:, close_rows].T)
                np.add.at(err_done.T, owner[close_rows], err[:, close_rows].T)
                pending &= ~close_rows

        if not np.any(pending):
            break
        if np.any(depth[pending] + 1 > q.max_depth):
            worst = owner[pending][depth[pending] + 1 > q.max_depth]
            raise QuadratureError(
                f"max_depth={q.max_depth} exhausted on integral(s) {np.unique(worst)}"
            )
        a_p, b_p, m_p = a[pending], b[pending], m[pending]
        a = np.concatenate([a_p, m_p])
        b = np.concatenate([m_p, b_p])
        owner = np.concatenate([owner[pending], owner[pending]])
        depth = np.concatenate([depth[pending] + 1, depth[pending] + 1])
        coarse = np.concatenate([left[:, pending], right[:, pending]], axis=1)

    return result


def integrate_scalar(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                     q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Convenience wrapper for a single integrand on a single interval."""
    if lo == hi:
        return 0.0
    if lo > hi:
        return -integrate_scalar(g, hi, lo, q)
    return float(integrate(lambda x, _o: g(x), [lo], [hi], q)[0, 0])
