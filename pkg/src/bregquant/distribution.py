"""One-dimensional densities, cell integrals, truncation and 2D samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize, special

from .divergence import BregmanFunction
from .errors import DomainError
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate, integrate_scalar

_SQRT2PI = math.sqrt(2.0 * math.pi)

DEFAULT_TAIL_MASS = 1e-12


@dataclass(frozen=True, eq=False)
class Density1D:
    """Absolutely continuous law on ``support = (a, b)`` with density ``pdf``.

    ``dlog_h`` is the (right) derivative of ``log pdf``.  ``log_concave`` is
    ``True`` for the built-in kinds and ``None`` (unknown) for custom
    densities until checked numerically.
    """

    kind: str
    support: tuple[float, float]
    pdf: Callable[[np.ndarray], np.ndarray]
    dlog_h: Callable[[np.ndarray], np.ndarray] | None = None
    cdf: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)
    total_mass_defect: float = 0.0
    log_concave: bool | None = None
    dlog_h_approximate: bool = False
    center: float | None = None  # symmetry center, when symmetric

    def __repr__(self) -> str:
        extra = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"Density1D({self.kind}{', ' + extra if extra else ''})"

    @property
    def a(self) -> float:
        return self.support[0]

    @property
    def b(self) -> float:
        return self.support[1]

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)

    def to_spec(self) -> dict:
        return {"kind": self.kind, **self.params}


# ----------------------------------------------------------------------------
# Built-in densities
# ----------------------------------------------------------------------------

def gaussian(mu: float = 0.0, sigma: float = 1.0) -> Density1D:
    mu, sigma = float(mu), float(sigma)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    return Density1D(
        kind="Gaussian",
        support=(-math.inf, math.inf),
        pdf=lambda x: np.exp(-0.5 * ((np.asarray(x) - mu) / sigma) ** 2) / (sigma * _SQRT2PI),
        dlog_h=lambda x: -(np.asarray(x) - mu) / sigma**2,
        cdf=lambda x: special.ndtr((np.asarray(x) - mu) / sigma),
        params={"mu": mu, "sigma": sigma},
        log_concave=True,
        center=mu,
    )


def uniform(a: float = 0.0, b: float = 1.0) -> Density1D:
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError("uniform needs finite a < b")
    width = b - a

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= a) & (x <= b), 1.0 / width, 0.0)

    return Density1D(
        kind="Uniform",
        support=(a, b),
        pdf=pdf,
        dlog_h=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        cdf=lambda x: np.clip((np.asarray(x, dtype=float) - a) / width, 0.0, 1.0),
        params={"a": a, "b": b},
        log_concave=True,
        center=0.5 * (a + b),
    )


def truncated_gaussian(mu: float, sigma: float, lo: float, hi: float,
                       tail_mass: float | None = None) -> Density1D:
    """Normal law conditioned on ``[lo, hi]``."""
    mu, sigma, lo, hi = map(float, (mu, sigma, lo, hi))
    if not (sigma > 0 and lo < hi and math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("truncated_gaussian needs sigma > 0 and finite lo < hi")
    alpha, beta = (lo - mu) / sigma, (hi - mu) / sigma
    # mass of the kept interval, computed on the side with small tails
    z = special.ndtr(beta) - special.ndtr(alpha) if alpha < 0 else special.ndtr(-alpha) - special.ndtr(-beta)
    cdf_lo = special.ndtr(alpha)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        val = np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * _SQRT2PI * z)
        return np.where((x >= lo) & (x <= hi), val, 0.0)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        return np.clip((special.ndtr((x - mu) / sigma) - cdf_lo) / z, 0.0, 1.0)

    symmetric = math.isclose(mu - lo, hi - mu, rel_tol=1e-12, abs_tol=1e-12)
    params = {"mu": mu, "sigma": sigma, "lo": lo, "hi": hi}
    return Density1D(
        kind="TruncatedGaussian",
        support=(lo, hi),
        pdf=pdf,
        dlog_h=lambda x: -(np.asarray(x) - mu) / sigma**2,
        cdf=cdf,
        params=params,
        total_mass_defect=float(1.0 - z) if tail_mass is None else float(tail_mass),
        log_concave=True,
        center=mu if symmetric else None,
    )


def custom_density(pdf: Callable, support: tuple[float, float],
                   dlog_h: Callable | None = None, *, normalize: bool = True,
                   q: QuadratureConfig = DEFAULT_QUADRATURE,
                   center: float | None = None) -> Density1D:
    """User density on a finite support, renormalized by quadrature.

    Without ``dlog_h`` a central-difference estimate of ``(log pdf)'`` is used
    and flagged approximate; such densities never receive a uniqueness verdict.
    """
    a, b = map(float, support)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError("custom densities need a finite support a < b")
    scale = 1.0
    if normalize:
        mass = integrate_scalar(lambda x: pdf(x), a, b, q)
        if not mass > 0:
            raise DomainError("density integrates to a nonpositive mass")
        scale = 1.0 / mass

    def h(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= a) & (x <= b)
        return np.where(inside, scale * np.asarray(pdf(np.clip(x, a, b)), dtype=float), 0.0)

    approximate = dlog_h is None
    if approximate:
        def dlog_h(x):
            x = np.asarray(x, dtype=float)
            step = 1e-6 * np.maximum(1.0, np.abs(x))
            return (np.log(h(x + step)) - np.log(h(x - step))) / (2.0 * step)

    return Density1D(
        kind="CustomDensity",
        support=(a, b),
        pdf=h,
        dlog_h=dlog_h,
        cdf=None,
        log_concave=None,
        dlog_h_approximate=approximate,
        center=center,
    )


_DENSITY_FACTORIES = {
    "Gaussian": (gaussian, ("mu", "sigma")),
    "Uniform": (uniform, ("a", "b")),
    "TruncatedGaussian": (truncated_gaussian, ("mu", "sigma", "lo", "hi")),
}


def density_from_spec(spec: dict) -> Density1D:
    """``{"kind": "Gaussian", "mu": 0, "sigma": 1, "tail_mass": 1e-12}`` etc.

    ``tail_mass`` (Gaussian only) truncates the support right away.
    """
    spec = dict(spec)
    kind = spec.pop("kind")
    tail_mass = spec.pop("tail_mass", None)
    try:
        factory, names = _DENSITY_FACTORIES[kind]
    except KeyError:
        raise DomainError(f"unknown distribution kind {kind!r}") from None
    unknown = set(spec) - set(names)
    if unknown:
        raise DomainError(f"{kind}: unexpected parameters {sorted(unknown)}")
    d = factory(**{n: spec[n] for n in names if n in spec})
    if tail_mass is not None:
        d = truncate_support(d, tail_mass)
    return d


# ----------------------------------------------------------------------------
# Support handling
# ----------------------------------------------------------------------------

def truncate_support(d: Density1D, tail_mass: float) -> Density1D:
    """Condition ``d`` on its central interval of mass ``1 - tail_mass``."""
    if not 0.0 < tail_mass < 0.5:
        raise ValueError("tail_mass must lie in (0, 0.5)")
    if d.bounded:
        raise ValueError(f"{d!r} already has a bounded support")
    if d.kind != "Gaussian":
        raise ValueError(f"no truncation rule for {d.kind}")
    mu, sigma = d.params["mu"], d.params["sigma"]
    half = -special.ndtri(0.5 * tail_mass)
    return truncated_gaussian(mu, sigma, mu - sigma * half, mu + sigma * half, tail_mass=tail_mass)


def working_density(d: Density1D, tail_mass: float = DEFAULT_TAIL_MASS) -> Density1D:
    """Bounded version of ``d``; Gaussians are truncated at ``tail_mass``."""
    return d if d.bounded else truncate_support(d, tail_mass)


def cdf(d: Density1D, x, q: QuadratureConfig = DEFAULT_QUADRATURE):
    if d.cdf is not None:
        return d.cdf(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xc = np.clip(x, d.a, d.b)
    out = integrate(lambda t, _o: d.pdf(t), np.full_like(xc, d.a), xc, q)[0]
    return out if out.size > 1 else float(out[0])


def quantile(d: Density1D, p: float, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Inverse CDF by bracketing root search on the bounded support."""
    wd = working_density(d)
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return float(optimize.brentq(lambda t: float(cdf(wd, t, q)) - p, wd.a, wd.b,
                                 xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


# ----------------------------------------------------------------------------
# Cell integrals
# ----------------------------------------------------------------------------

def _split_at(lo, hi, pivots):
    """Split ``[lo, hi]`` at ``pivots`` when they fall strictly inside."""
    pivots = np.clip(pivots, lo, hi)
    return np.concatenate([lo, pivots]), np.concatenate([pivots, hi])


def moments(d: Density1D, lo, hi, q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Vectorized mass and first moment of ``d`` over each ``[lo_j, hi_j]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))

    def g(x, _owner):
        h = d.pdf(x)
        return np.stack([h, x * h])

    out = integrate(g, lo, hi, q)
    return out[0], out[1]


def cell_moments(d: Density1D, q: QuadratureConfig, lo: float, hi: float) -> tuple[float, float]:
    """Mass and first moment of ``d`` restricted to ``[lo, hi]``."""
    _check_interval(d, lo, hi)
    if lo == hi:
        return 0.0, 0.0
    mass, first = moments(d, [lo], [hi], q)
    return float(mass[0]), float(first[0])


def weighted_moments(d: Density1D, fn: BregmanFunction, codes, r: float, lo, hi,
                     q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Vectorized ``int phi(xi, x_j)^(r/2-1) dP`` and ``int xi phi(...)^(r/2-1) dP``.

    Each interval is split at its code, where the weight may have a kink.
    """
    codes = np.atleast_1d(np.asarray(codes, dtype=float))
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    expo = 0.5 * r - 1.0
    if expo == 0.0:
        return moments(d, lo, hi, q)
    n = codes.size
    a, b = _split_at(lo, hi, codes)
    own = np.concatenate([codes, codes])

    def g(x, owner):
        h = d.pdf(x)
        w = fn.divergence(x, own[owner][:, None]) ** expo
        return np.stack([w * h, x * w * h])

    out = integrate(g, a, b, q)
    return out[0, :n] + out[0, n:], out[1, :n] + out[1, n:]


def weighted_cell_moments(d: Density1D, q: QuadratureConfig, fn: BregmanFunction,
                          x_i: float, r: float, lo: float, hi: float) -> tuple[float, float]:
    """Weighted mass and moment of one cell with weight ``phi_F(xi, x_i)^(r/2 - 1)``."""
    _check_interval(d, lo, hi)
    if r < 2:
        raise ValueError("weighted moments are defined for r >= 2")
    _check_support_in_domain(fn, lo, hi)
    if lo == hi:
        return 0.0, 0.0
    wm, wf = weighted_moments(d, fn, [x_i], r, [lo], [hi], q)
    return float(wm[0]), float(wf[0])


def expectation(d: Density1D, g: Callable[[np.ndarray], np.ndarray],
                q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    wd = working_density(d)
    return integrate_scalar(lambda x: g(x) * wd.pdf(x), wd.a, wd.b, q)


def mean(d: Density1D, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    wd = working_density(d)
    mass, first = moments(wd, [wd.a], [wd.b], q)
    return float(first[0] / mass[0])


def _check_interval(d: Density1D, lo, hi):
    if not (d.a <= lo <= hi <= d.b):
        raise DomainError(f"interval [{lo}, {hi}] not inside support {d.support}")


def _check_support_in_domain(fn: BregmanFunction, lo, hi):
    # support endpoints may touch the domain boundary; the open interior must fit
    if lo < fn.lo or hi > fn.hi:
        raise DomainError(f"[{lo}, {hi}] leaves the domain {fn.domain} of {fn!r}")


def check_support_in_domain(fn: BregmanFunction, d: Density1D) -> None:
    _check_support_in_domain(fn, d.a, d.b)


# ----------------------------------------------------------------------------
# 2D sampling
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Gaussian2D:
    """``N(mean, cov)``, optionally conditioned on the open positive quadrant."""

    mean: tuple[float, float] = (0.5, 1.0)
    cov: tuple[tuple[float, float], tuple[float, float]] = ((0.25, 0.0), (0.0, 0.25))
    positive_quadrant: bool = False

    def to_spec(self) -> dict:
        return {"mean": list(self.mean), "cov": [list(r) for r in self.cov],
                "positive_quadrant": self.positive_quadrant}


@dataclass(frozen=True, eq=False)
class SampleSet2D:
    points: np.ndarray
    seed: int
    source: Gaussian2D

    def __len__(self) -> int:
        return len(self.points)


def sample_2d(descriptor: Gaussian2D, n: int, seed: int) -> SampleSet2D:
    """Draw ``n`` i.i.d. points.

    Uses numpy's PCG64 generator seeded with ``seed``, standard normals from
    ``Generator.standard_normal`` mapped through the Cholesky factor of the
    covariance, and, for the positive quadrant, rejection in fixed-size
    batches; the output is a pure function of ``(descriptor, n, seed)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    chol = np.linalg.cholesky(np.asarray(descriptor.cov, dtype=float))
    mu = np.asarray(descriptor.mean, dtype=float)
    kept = []
    count = 0
    while count < n:
        batch = max(n - count, 64) * (2 if descriptor.positive_quadrant else 1)
        z = rng.standard_normal((batch, 2)) @ chol.T + mu
        if descriptor.positive_quadrant:
            z = z[np.all(z > 0.0, axis=1)]
        kept.append(z)
        count += len(z)
    pts = np.concatenate(kept)[:n]
    pts.setflags(write=False)
    return SampleSet2D(points=pts, seed=seed, source=descriptor)
