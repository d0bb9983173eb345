"""Sample-based Bregman-Lloyd clustering in the plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import SampleSet2D
from .divergence import BregmanFunction, from_spec, in_domain
from .errors import DomainError, NotConverged
from .solver import RunTrace, SolverConfig

_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class Divergence2D:
    """``SquaredNorm2``, ``Mahalanobis`` (matrix ``S``) or ``AdditiveMarginal`` (one generator per axis)."""

    kind: str
    S: np.ndarray | None = None
    marginals: tuple[BregmanFunction, BregmanFunction] | None = None

    def __post_init__(self):
        if self.kind == "Mahalanobis":
            S = np.array(self.S, dtype=float)
            if S.shape != (2, 2) or not np.allclose(S, S.T, rtol=0, atol=0):
                raise DomainError("S must be a symmetric 2x2 matrix")
            if np.any(np.linalg.eigvalsh(S) <= 0):
                raise DomainError("S must be positive definite")
            S.setflags(write=False)
            object.__setattr__(self, "S", S)
        elif self.kind == "AdditiveMarginal":
            if self.marginals is None or len(self.marginals) != 2:
                raise DomainError("AdditiveMarginal needs one generator per axis")
            object.__setattr__(self, "marginals", tuple(self.marginals))
        elif self.kind != "SquaredNorm2":
            raise DomainError(f"unknown 2D divergence kind {self.kind!r}")

    @property
    def domain(self) -> tuple[tuple[float, float], tuple[float, float]]:
        if self.kind == "AdditiveMarginal":
            return tuple(fn.domain for fn in self.marginals)
        return ((-math.inf, math.inf), (-math.inf, math.inf))

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "AdditiveMarginal":
            return in_domain(self.marginals[0], pts[:, 0]) & in_domain(self.marginals[1], pts[:, 1])
        return np.all(np.isfinite(pts), axis=1)

    def check(self, pts) -> None:
        if not np.all(self.contains(pts)):
            raise DomainError(f"point(s) outside the domain {self.domain} of {self.kind}")

    def pairwise(self, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Unchecked ``phi(xi_k, x_j)`` for every sample ``k`` and code ``j``."""
        xi = np.asarray(xi, dtype=float)[:, None, :]
        x = np.asarray(x, dtype=float)[None, :, :]
        diff = xi - x
        if self.kind == "SquaredNorm2":
            return np.sum(diff * diff, axis=-1)
        if self.kind == "Mahalanobis":
            return np.einsum("kji,il,kjl->kj", diff, self.S, diff)
        f0, f1 = self.marginals
        return f0.divergence(xi[..., 0], x[..., 0]) + f1.divergence(xi[..., 1], x[..., 1])

    def to_spec(self) -> dict:
        if self.kind == "Mahalanobis":
            return {"kind": "Mahalanobis", "S": self.S.tolist()}
        if self.kind == "AdditiveMarginal":
            return {"kind": "AdditiveMarginal", "marginals": [fn.to_spec() for fn in self.marginals]}
        return {"kind": "SquaredNorm2"}


def squared_norm2() -> Divergence2D:
    return Divergence2D("SquaredNorm2")


def mahalanobis(S) -> Divergence2D:
    return Divergence2D("Mahalanobis", S=S)


def additive(fn_x: BregmanFunction, fn_y: BregmanFunction | None = None) -> Divergence2D:
    """``phi(xi, x) = phi_f(xi_1, x_1) + phi_g(xi_2, x_2)``; same generator on both axes by default."""
    return Divergence2D("AdditiveMarginal", marginals=(fn_x, fn_y if fn_y is not None else fn_x))


def divergence2d_from_spec(spec: dict) -> Divergence2D:
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "SquaredNorm2":
        allowed = set()
    elif kind == "Mahalanobis":
        allowed = {"S"}
    elif kind == "AdditiveMarginal":
        allowed = {"marginals"}
    else:
        raise DomainError(f"unknown 2D divergence kind {kind!r}")
    if set(spec) - allowed:
        raise DomainError(f"{kind}: unexpected parameters {sorted(set(spec) - allowed)}")
    if kind == "Mahalanobis":
        return mahalanobis(spec["S"])
    if kind == "AdditiveMarginal":
        marg = spec["marginals"]
        marg = [marg] if isinstance(marg, dict) else list(marg)
        fns = [from_spec(m) for m in marg]
        return additive(*fns)
    return squared_norm2()


def phi2(dv: Divergence2D, xi, x) -> float:
    """Divergence between two points of the plane, with domain validation."""
    xi = np.asarray(xi, dtype=float).reshape(1, 2)
    x = np.asarray(x, dtype=float).reshape(1, 2)
    dv.check(xi)
    dv.check(x)
    return float(max(dv.pairwise(xi, x)[0, 0], 0.0))


@dataclass(frozen=True, eq=False)
class Codebook2D:
    codes: np.ndarray
    assignment: np.ndarray | None = None

    def __post_init__(self):
        codes = np.array(self.codes, dtype=float).reshape(-1, 2)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        if self.assignment is not None:
            a = np.array(self.assignment, dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return len(self.codes)


def _points(samples) -> np.ndarray:
    return np.asarray(samples.points if isinstance(samples, SampleSet2D) else samples, dtype=float)


def _nearest(dv: Divergence2D, pts: np.ndarray, codes: np.ndarray):
    idx = np.empty(len(pts), dtype=np.int64)
    best = np.empty(len(pts))
    for s in range(0, len(pts), _CHUNK):
        dmat = dv.pairwise(pts[s:s + _CHUNK], codes)
        idx[s:s + _CHUNK] = np.argmin(dmat, axis=1)  # first minimum: ties go to the lowest index
        best[s:s + _CHUNK] = np.maximum(dmat[np.arange(len(dmat)), idx[s:s + _CHUNK]], 0.0)
    return idx, best


def assign(dv: Divergence2D, samples, cb: Codebook2D | np.ndarray):
    """Index of the nearest code (in divergence) for every sample and the mean minimal divergence."""
    codes = cb.codes if isinstance(cb, Codebook2D) else np.asarray(cb, dtype=float).reshape(-1, 2)
    dv.check(codes)
    pts = _points(samples)
    idx, best = _nearest(dv, pts, codes)
    return idx, float(np.mean(best))


def centroids(pts: np.ndarray, idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cluster means and a mask of empty clusters."""
    out = np.zeros((n, 2))
    empty = np.zeros(n, dtype=bool)
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(n + 1))
    for k in range(n):
        members = order[bounds[k]:bounds[k + 1]]
        if members.size == 0:
            empty[k] = True
        else:
            out[k] = pts[members].mean(axis=0)
    return out, empty


def kmeanspp(dv: Divergence2D, pts: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Seeding with probabilities proportional to the divergence to the nearest chosen code."""
    chosen = [int(rng.integers(len(pts)))]
    cost = dv.pairwise(pts, pts[chosen])[:, 0]
    for _ in range(1, n):
        total = float(np.sum(cost))
        if not total > 0:
            raise ValueError("fewer distinct samples than requested codes")
        k = int(rng.choice(len(pts), p=cost / total))
        chosen.append(k)
        cost = np.minimum(cost, dv.pairwise(pts, pts[[k]])[:, 0])
    return pts[chosen].copy()


def lloyd2d(dv: Divergence2D, samples, n: int, seed: int = 0,
            cfg: SolverConfig = SolverConfig(max_iter=10_000)) -> tuple[Codebook2D, RunTrace]:
    """Lloyd's algorithm on the empirical measure of ``samples``.

    Codes move to the mean of their cluster, which is the Bregman centroid
    for every generator.  An empty cluster is re-seeded at the sample with
    the largest current divergence and the iteration is flagged in the
    trace.  Convergence means the assignment no longer changes, so the
    returned codes are exactly the means of their clusters.
    """
    pts = _points(samples)
    if len(pts) < n:
        raise ValueError("need at least n samples")
    dv.check(pts)
    rng = np.random.Generator(np.random.PCG64(seed))
    codes = kmeanspp(dv, pts, n, rng)
    trace = RunTrace()
    prev = None
    reseeded = False
    last_step = math.inf
    for it in range(cfg.max_iter + 1):
        idx, best = _nearest(dv, pts, codes)
        new, empty = centroids(pts, idx, n)
        residual = float(np.max(np.abs(new - codes)[~empty])) if np.any(~empty) else math.inf
        trace.record(float(np.mean(best)), last_step, residual, reseeded)
        trace.iterations = it
        if prev is not None and np.array_equal(idx, prev) and not reseeded:
            trace.converged = True
            return Codebook2D(codes, idx), trace
        if it == cfg.max_iter:
            break
        reseeded = bool(np.any(empty))
        if reseeded:
            taken = set()
            for k in np.flatnonzero(empty):
                for far in np.argsort(-best, kind="stable"):
                    if int(far) not in taken:
                        break
                taken.add(int(far))
                new[k] = pts[far]
        last_step = float(np.max(np.abs(new - codes)))
        codes = new
        prev = idx
    raise NotConverged(f"assignments still changing after {cfg.max_iter} iterations",
                       codes=Codebook2D(codes, idx), trace=trace)


def matrix_sqrt(S) -> np.ndarray:
    """Symmetric square root of a positive-definite matrix."""
    w, V = np.linalg.eigh(np.asarray(S, dtype=float))
    if np.any(w <= 0):
        raise DomainError("S must be positive definite")
    return (V * np.sqrt(w)) @ V.T
