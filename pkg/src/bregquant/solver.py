"""Fixed-point and gradient solvers for the 1D master equation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distortion import _check_distinct, cell_integrals, distortion, prepare
from .distribution import Density1D, quantile, working_density
from .divergence import BregmanFunction
from .errors import DegenerateCodes, NotConverged, OrderCollapse, OrderingError, ZeroWeightCell
from .geometry1d import CellBoundaries, Codebook1D
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig

COLLAPSE_RTOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules shared by all solvers.

    ``init`` is ``"Quantiles"`` or an explicit increasing sequence of codes.
    Convergence needs both the sup-norm step and the sup-norm master
    equation residual to fall below their tolerances.
    """

    max_iter: int = 200_000
    code_tol: float = 1e-11
    residual_tol: float = 1e-10
    damping: float = 0.5
    init: str | tuple[float, ...] = "Quantiles"

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if not (self.code_tol > 0 and self.residual_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if isinstance(self.init, str):
            if self.init != "Quantiles":
                raise ValueError(f"unknown init {self.init!r}")
        else:
            object.__setattr__(self, "init", tuple(float(v) for v in self.init))


@dataclass
class RunTrace:
    """Per-iteration distortion, sup step and sup residual."""

    distortion: list[float] = field(default_factory=list)
    step: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    reseeded: list[bool] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def record(self, g: float, step: float, residual: float, reseeded: bool = False):
        self.distortion.append(float(g))
        self.step.append(float(step))
        self.residual.append(float(residual))
        self.reseeded.append(bool(reseeded))

    def to_dict(self) -> dict:
        def clean(seq):
            return [v if math.isfinite(v) else None for v in seq]

        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "distortion": clean(self.distortion),
            "step": clean(self.step),
            "residual": clean(self.residual),
            "reseeded": list(self.reseeded),
        }


def init_quantiles(d: Density1D, n: int, q: QuadratureConfig = DEFAULT_QUADRATURE) -> Codebook1D:
    """The ``(2i-1)/(2n)`` quantiles of ``d`` by bracketing root search on the CDF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Codebook1D([quantile(d, (2 * i - 1) / (2 * n), q) for i in range(1, n + 1)])


def _initial(d: Density1D, n: int, q: QuadratureConfig, cfg: SolverConfig) -> np.ndarray:
    if cfg.init == "Quantiles":
        return init_quantiles(d, n, q).codes.copy()
    codes = Codebook1D(cfg.init).codes.copy()
    if codes.size != n:
        raise ValueError(f"init has {codes.size} codes, expected {n}")
    return codes


def _guard_order(x: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(x))))
    if x.size > 1 and np.min(np.diff(x)) < COLLAPSE_RTOL * scale:
        raise OrderCollapse("two codes merged during iteration")


def _fixed_point(fn, d, n, r, q, cfg, weighted):
    if n < 1:
        raise ValueError("n must be >= 1")
    wd = working_density(d)
    x = _initial(wd, n, q, cfg)
    prepare(fn, wd, Codebook1D(x))  # domain and support checks
    relax = cfg.damping if weighted else 1.0
    trace = RunTrace()
    last_step = math.inf
    for it in range(cfg.max_iter + 1):
        cl = prepare(fn, wd, Codebook1D(x))[1]
        wmass, wmom, contrib = cell_integrals(fn, wd, x, cl.cuts, r, q, weighted=weighted)
        if np.any(wmass <= np.finfo(float).tiny):
            raise ZeroWeightCell(f"cell(s) {np.flatnonzero(wmass <= np.finfo(float).tiny)} carry no weight")
        target = wmom / wmass
        residual = float(np.max(np.abs(x - target)))
        trace.record(float(np.sum(contrib)), last_step, residual)
        trace.iterations = it
        if residual <= cfg.residual_tol and last_step <= cfg.code_tol:
            trace.converged = True
            return Codebook1D(x), cl, trace
        if it == cfg.max_iter:
            break
        new = x + relax * (target - x)
        _guard_order(new)
        last_step = float(np.max(np.abs(new - x)))
        x = new
    raise NotConverged(f"no convergence after {cfg.max_iter} iterations (residual {residual:.3e})",
                       codes=Codebook1D(x), cuts=cl, trace=trace)


def lloyd(fn: BregmanFunction, d: Density1D, n: int, q: QuadratureConfig = DEFAULT_QUADRATURE,
          cfg: SolverConfig = SolverConfig()) -> tuple[Codebook1D, CellBoundaries, RunTrace]:
    """Lloyd iteration ``x_i <- E[X | X in C_i(x)]`` for ``r = 2``.

    Every Bregman divergence has the conditional mean as its centroid, so
    the update is the same for all generators; only the cells change.

    Raises
    ------
    NotConverged
        After ``cfg.max_iter`` updates; the exception carries the last
        iterate, its cells and the trace.
    """
    return _fixed_point(fn, d, n, 2.0, q, cfg, weighted=False)


def weighted_lloyd(fn: BregmanFunction, d: Density1D, n: int, r: float,
                   q: QuadratureConfig = DEFAULT_QUADRATURE, cfg: SolverConfig = SolverConfig()
                   ) -> tuple[Codebook1D, CellBoundaries, RunTrace]:
    """Damped fixed point of ``x_i = int xi w_i dP / int w_i dP`` with ``w_i = phi_F(xi, x_i)^(r/2-1)``.

    No descent guarantee is claimed; ``cfg.damping`` relaxes the update.
    """
    if not r > 2:
        raise ValueError("weighted_lloyd needs r > 2; use lloyd for r = 2")
    return _fixed_point(fn, d, n, float(r), q, cfg, weighted=True)


def gradient_descent(fn: BregmanFunction, d: Density1D, n: int, r: float = 2.0,
                     q: QuadratureConfig = DEFAULT_QUADRATURE, step: float = 0.1,
                     cfg: SolverConfig = SolverConfig()) -> tuple[Codebook1D, RunTrace]:
    """Plain descent ``x <- x - step * grad G_{r,n}(x)``.

    Stops when the sup-norm of the gradient is below ``cfg.residual_tol``.
    A step below ``1 / sup F''`` keeps the iterates ordered.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if r < 2:
        raise ValueError("gradient descent needs r >= 2")
    wd = working_density(d)
    x = _initial(wd, n, q, cfg)
    trace = RunTrace()
    last_step = math.inf
    for it in range(cfg.max_iter + 1):
        cb = Codebook1D(x)
        try:
            _check_distinct(x)
        except DegenerateCodes as exc:
            raise OrderCollapse(str(exc)) from exc
        rep = distortion(fn, wd, cb, r, q, with_gradient=True)
        g = rep.gradient
        gnorm = float(np.max(np.abs(g)))
        trace.record(rep.g, last_step, gnorm)
        trace.iterations = it
        if gnorm <= cfg.residual_tol:
            trace.converged = True
            return cb, trace
        if it == cfg.max_iter:
            break
        new = x - step * g
        if np.any(np.diff(new) <= 0):
            raise OrderCollapse("descent step broke the ordering of the codes; reduce step")
        _guard_order(new)
        last_step = float(np.max(np.abs(new - x)))
        x = new
    raise NotConverged(f"no convergence after {cfg.max_iter} iterations (gradient {gnorm:.3e})",
                       codes=Codebook1D(x), trace=trace)
