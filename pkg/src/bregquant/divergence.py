"""Catalog of strictly convex generators and their Bregman divergences.

A generator ``F`` on an open interval ``(a, b)`` induces the divergence

    phi_F(xi, x) = F(xi) - F(x) - F'(x) (xi - x)

which is nonnegative, vanishes only on the diagonal and is generally not
symmetric.  Every built-in generator carries analytic first, second and
(right) third derivatives plus a numerically careful closed form of the
divergence; ``custom`` generators fall back to central differences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import BoundViolation, DomainError

_EPS = np.finfo(float).eps
_CBRT_EPS = _EPS ** (1.0 / 3.0)
_QUARTIC_EPS = _EPS ** 0.25


class LogCurvature(str, enum.Enum):
    """Shape of ``log F''`` on the working interval."""

    LOG_CONCAVE = "LogConcave"
    LOG_CONVEX = "LogConvex"
    NEITHER = "Neither"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, eq=False)
class BregmanFunction:
    """Strictly convex generator with derivatives and open domain ``(lo, hi)``."""

    kind: str
    domain: tuple[float, float]
    f: Callable[[np.ndarray], np.ndarray]
    f1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    f3r: Callable[[np.ndarray], np.ndarray] | None = None
    closed_form: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    log_curvature: LogCurvature = LogCurvature.UNKNOWN
    f2_symmetric: bool = False
    f2_sup: float | None = None
    params: dict = field(default_factory=dict)

    def __repr__(self) -> str:
        extra = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"BregmanFunction({self.kind}{', ' + extra if extra else ''})"

    @property
    def lo(self) -> float:
        return self.domain[0]

    @property
    def hi(self) -> float:
        return self.domain[1]

    def divergence(self, xi, x):
        """Unchecked, vectorized ``phi_F(xi, x)``; clipped at zero."""
        xi = np.asarray(xi, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.closed_form is not None:
            out = self.closed_form(xi, x)
        else:
            out = self.f(xi) - self.f(x) - self.f1(x) * (xi - x)
        return np.where(xi == x, 0.0, np.maximum(out, 0.0))

    def third(self, x):
        if self.f3r is not None:
            return self.f3r(np.asarray(x, dtype=float))
        x = np.asarray(x, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (self.f2(x + h) - self.f2(x)) / h

    def to_spec(self) -> dict:
        return {"kind": self.kind, **self.params}


def domain_margin(domain: tuple[float, float]) -> float:
    finite = [abs(v) for v in domain if math.isfinite(v)]
    return 1e-12 * max([1.0, *finite])


def in_domain(fn: BregmanFunction, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    eps = domain_margin(fn.domain)
    return (x > fn.lo + eps) & (x < fn.hi - eps) & np.isfinite(x)


def check_domain(fn: BregmanFunction, *points) -> None:
    for p in points:
        if not np.all(in_domain(fn, p)):
            bad = np.asarray(p, dtype=float)
            bad = bad[~in_domain(fn, bad)] if bad.ndim else bad
            raise DomainError(f"{fn!r}: point(s) {bad} outside open domain {fn.domain}")


# ----------------------------------------------------------------------------
# Catalog
# ----------------------------------------------------------------------------

def squared_norm() -> BregmanFunction:
    return BregmanFunction(
        kind="SquaredNorm",
        domain=(-math.inf, math.inf),
        f=lambda x: x * x,
        f1=lambda x: 2.0 * x,
        f2=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
        f3r=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        closed_form=lambda xi, x: (xi - x) ** 2,
        log_curvature=LogCurvature.LOG_CONCAVE,
        f2_symmetric=True,
        f2_sup=2.0,
    )


def norm_like(lam: float) -> BregmanFunction:
    """``F(x) = x**lam`` on ``(0, inf)``, ``lam > 1``."""
    lam = float(lam)
    if not lam > 1.0:
        raise DomainError(f"NormLike needs lam > 1, got {lam}")
    # log F'' = const + (lam - 2) log x
    curv = LogCurvature.LOG_CONCAVE if lam >= 2.0 else LogCurvature.LOG_CONVEX

    def closed(xi, x):
        return xi**lam + (lam - 1.0) * x**lam - lam * xi * x ** (lam - 1.0)

    return BregmanFunction(
        kind="NormLike",
        domain=(0.0, math.inf),
        f=lambda x: np.asarray(x, dtype=float) ** lam,
        f1=lambda x: lam * np.asarray(x, dtype=float) ** (lam - 1.0),
        f2=lambda x: lam * (lam - 1.0) * np.asarray(x, dtype=float) ** (lam - 2.0),
        f3r=lambda x: lam * (lam - 1.0) * (lam - 2.0) * np.asarray(x, dtype=float) ** (lam - 3.0),
        closed_form=closed,
        log_curvature=curv,
        f2_sup=lam * (lam - 1.0) if lam == 2.0 else None,
        params={"lam": lam},
    )


def itakura_saito() -> BregmanFunction:
    def closed(xi, x):
        t = xi / x - 1.0
        return t - np.log1p(t)

    return BregmanFunction(
        kind="ItakuraSaito",
        domain=(0.0, math.inf),
        f=lambda x: -np.log(x),
        f1=lambda x: -1.0 / np.asarray(x, dtype=float),
        f2=lambda x: 1.0 / np.asarray(x, dtype=float) ** 2,
        f3r=lambda x: -2.0 / np.asarray(x, dtype=float) ** 3,
        closed_form=closed,
        log_curvature=LogCurvature.LOG_CONVEX,
    )


def kullback_leibler() -> BregmanFunction:
    return BregmanFunction(
        kind="KullbackLeibler",
        domain=(0.0, math.inf),
        f=lambda x: special.xlogy(x, x),
        f1=lambda x: np.log(x) + 1.0,
        f2=lambda x: 1.0 / np.asarray(x, dtype=float),
        f3r=lambda x: -1.0 / np.asarray(x, dtype=float) ** 2,
        closed_form=lambda xi, x: special.kl_div(xi, x),
        # log F'' = -log x is convex
        log_curvature=LogCurvature.LOG_CONVEX,
    )


def logistic() -> BregmanFunction:
    def f(x):
        return special.xlogy(x, x) + special.xlogy(1.0 - x, 1.0 - x)

    return BregmanFunction(
        kind="Logistic",
        domain=(0.0, 1.0),
        f=f,
        f1=lambda x: special.logit(x),
        f2=lambda x: 1.0 / (np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float))),
        f3r=lambda x: (2.0 * np.asarray(x) - 1.0) / (np.asarray(x) * (1.0 - np.asarray(x))) ** 2,
        closed_form=lambda xi, x: special.rel_entr(xi, x) + special.rel_entr(1.0 - xi, 1.0 - x),
        log_curvature=LogCurvature.LOG_CONVEX,
        f2_symmetric=False,
    )


def softplus(a: float = 1.0) -> BregmanFunction:
    """``F(x) = log(1 + exp(a x)) / a``, ``a > 0``."""
    a = float(a)
    if not a > 0.0:
        raise DomainError(f"SoftPlus needs a > 0, got {a}")

    def f(x):
        return np.logaddexp(0.0, a * np.asarray(x, dtype=float)) / a

    def f2(x):
        s = special.expit(a * np.asarray(x, dtype=float))
        return a * s * (1.0 - s)

    def f3(x):
        s = special.expit(a * np.asarray(x, dtype=float))
        return a * a * s * (1.0 - s) * (1.0 - 2.0 * s)

    def closed(xi, x):
        return (np.logaddexp(0.0, a * xi) - np.logaddexp(0.0, a * x)) / a - special.expit(a * x) * (xi - x)

    return BregmanFunction(
        kind="SoftPlus",
        domain=(-math.inf, math.inf),
        f=f,
        f1=lambda x: special.expit(a * np.asarray(x, dtype=float)),
        f2=f2,
        f3r=f3,
        closed_form=closed,
        log_curvature=LogCurvature.LOG_CONCAVE,
        f2_symmetric=True,
        f2_sup=a / 4.0,
        params={"a": a},
    )


def _log_cosh(y):
    y = np.abs(np.asarray(y, dtype=float))
    return y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)


def soft_butterfly(a: float = 1.0) -> BregmanFunction:
    """``F(x) = log(cosh(a x)) / a``, ``a > 0``."""
    a = float(a)
    if not a > 0.0:
        raise DomainError(f"SoftButterfly needs a > 0, got {a}")

    def f2(x):
        t = np.tanh(a * np.asarray(x, dtype=float))
        return a * (1.0 - t) * (1.0 + t)

    def f3(x):
        t = np.tanh(a * np.asarray(x, dtype=float))
        return -2.0 * a * a * t * (1.0 - t) * (1.0 + t)

    def closed(xi, x):
        return (_log_cosh(a * xi) - _log_cosh(a * x)) / a - np.tanh(a * x) * (xi - x)

    return BregmanFunction(
        kind="SoftButterfly",
        domain=(-math.inf, math.inf),
        f=lambda x: _log_cosh(a * np.asarray(x, dtype=float)) / a,
        f1=lambda x: np.tanh(a * np.asarray(x, dtype=float)),
        f2=f2,
        f3r=f3,
        closed_form=closed,
        log_curvature=LogCurvature.LOG_CONCAVE,
        f2_symmetric=True,
        f2_sup=a,
        params={"a": a},
    )


def exponential(a: float = 1.0) -> BregmanFunction:
    """``F(x) = exp(a x)``, any ``a != 0``."""
    a = float(a)
    if a == 0.0:
        raise DomainError("Exponential with a = 0 is not strictly convex")

    def closed(xi, x):
        ex = np.exp(a * x)
        # e^{a x} (e^{t} - 1 - t), t = a (xi - x)
        t = a * (xi - x)
        return ex * (np.expm1(t) - t)

    return BregmanFunction(
        kind="Exponential",
        domain=(-math.inf, math.inf),
        f=lambda x: np.exp(a * np.asarray(x, dtype=float)),
        f1=lambda x: a * np.exp(a * np.asarray(x, dtype=float)),
        f2=lambda x: a * a * np.exp(a * np.asarray(x, dtype=float)),
        f3r=lambda x: a**3 * np.exp(a * np.asarray(x, dtype=float)),
        closed_form=closed,
        # log F'' is affine: both concave and convex
        log_curvature=LogCurvature.LOG_CONCAVE,
        params={"a": a},
    )


def custom(
    f: Callable,
    domain: tuple[float, float] = (-math.inf, math.inf),
    f1: Callable | None = None,
    f2: Callable | None = None,
    f3r: Callable | None = None,
    *,
    log_curvature: LogCurvature = LogCurvature.UNKNOWN,
    f2_symmetric: bool = False,
    f2_sup: float | None = None,
) -> BregmanFunction:
    """Wrap a user generator; missing derivatives come from central differences.

    ``f1`` uses the step ``cbrt(eps) * max(1, |x|)``.  When only ``f`` is given,
    ``f2`` is a second difference with step ``eps**0.25 * max(1, |x|)``.
    """

    def _scale(x):
        return np.maximum(1.0, np.abs(x))

    if f1 is None:
        def f1(x):
            x = np.asarray(x, dtype=float)
            h = _CBRT_EPS * _scale(x)
            return (f(x + h) - f(x - h)) / (2.0 * h)
        have_f1 = False
    else:
        have_f1 = True

    if f2 is None:
        if have_f1:
            _f1 = f1

            def f2(x):
                x = np.asarray(x, dtype=float)
                h = _CBRT_EPS * _scale(x)
                return (_f1(x + h) - _f1(x - h)) / (2.0 * h)
        else:
            def f2(x):
                x = np.asarray(x, dtype=float)
                h = _QUARTIC_EPS * _scale(x)
                return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)

    return BregmanFunction(
        kind="Custom",
        domain=(float(domain[0]), float(domain[1])),
        f=lambda x: np.asarray(f(np.asarray(x, dtype=float)), dtype=float),
        f1=f1,
        f2=f2,
        f3r=f3r,
        log_curvature=LogCurvature(log_curvature),
        f2_symmetric=f2_symmetric,
        f2_sup=f2_sup,
    )


def linear_combination(terms: Sequence[tuple[float, BregmanFunction]]) -> BregmanFunction:
    """Generator ``sum_k w_k F_k`` on the intersection of the domains."""
    terms = _validate_terms(terms)
    lo = max(fn.lo for _, fn in terms)
    hi = min(fn.hi for _, fn in terms)
    if not lo < hi:
        raise DomainError("generators have disjoint domains")

    def combine(attr):
        getters = [(w, getattr(fn, attr)) for w, fn in terms]
        return lambda x: sum(w * g(x) for w, g in getters)

    return BregmanFunction(
        kind="Custom",
        domain=(lo, hi),
        f=combine("f"),
        f1=combine("f1"),
        f2=combine("f2"),
        f3r=lambda x: sum(w * fn.third(x) for w, fn in terms),
        closed_form=lambda xi, x: sum(w * fn.divergence(xi, x) for w, fn in terms),
    )


_FACTORIES = {
    "SquaredNorm": (squared_norm, ()),
    "NormLike": (norm_like, ("lam",)),
    "ItakuraSaito": (itakura_saito, ()),
    "KullbackLeibler": (kullback_leibler, ()),
    "Logistic": (logistic, ()),
    "SoftPlus": (softplus, ("a",)),
    "SoftButterfly": (soft_butterfly, ("a",)),
    "Exponential": (exponential, ("a",)),
}

CATALOG_KINDS = tuple(_FACTORIES)


def from_spec(spec: dict) -> BregmanFunction:
    """Build a catalog generator from ``{"kind": ..., <params>}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    try:
        factory, names = _FACTORIES[kind]
    except KeyError:
        raise DomainError(f"unknown divergence kind {kind!r}") from None
    unknown = set(spec) - set(names)
    if unknown:
        raise DomainError(f"{kind}: unexpected parameters {sorted(unknown)}")
    missing = [n for n in names if n not in spec]
    if missing:
        raise DomainError(f"{kind}: missing parameters {missing}")
    return factory(*(spec[n] for n in names))


# ----------------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------------

def phi(fn: BregmanFunction, xi, x):
    """Bregman divergence ``phi_F(xi, x)`` with domain validation.

    Returns a float for scalar input, an array otherwise.
    """
    check_domain(fn, xi, x)
    out = fn.divergence(xi, x)
    return float(out) if np.ndim(out) == 0 else out


def _validate_terms(terms):
    terms = list(terms)
    if not terms:
        raise DomainError("empty linear combination")
    if any(w < 0 for w, _ in terms):
        raise DomainError("weights must be nonnegative")
    if not any(w > 0 for w, _ in terms):
        raise DomainError("all weights are zero")
    return terms


def phi_linear_combination(terms: Sequence[tuple[float, BregmanFunction]], xi, x):
    """``sum_k w_k phi_{F_k}(xi, x)``; zero-weight terms are skipped entirely."""
    terms = _validate_terms(terms)
    total = 0.0
    for w, fn in terms:
        if w == 0:
            continue
        total = total + w * phi(fn, xi, x)
    return total


def three_point_residual(fn: BregmanFunction, u, v, w):
    """``phi(u,v) + phi(v,w) - phi(u,w) - (F'(w) - F'(v))(u - v)``, zero up to rounding."""
    check_domain(fn, u, v, w)
    d = fn.divergence
    out = d(u, v) + d(v, w) - d(u, w) - (fn.f1(w) - fn.f1(v)) * (np.asarray(u) - np.asarray(v))
    return float(out) if np.ndim(out) == 0 else out


def euclidean_envelope(fn: BregmanFunction, xi: float, x: float,
                       lipschitz_of_f1: float | None = None,
                       alpha: float | None = None) -> tuple[float, float, float]:
    """Sandwich ``phi_F(xi, x)`` between ``alpha/2 |xi-x|^2`` and ``L/2 |xi-x|^2``.

    Raises ``BoundViolation`` if the supplied constants are inconsistent with
    the computed divergence on this pair.
    """
    if lipschitz_of_f1 is None and alpha is None:
        raise ValueError("supply at least one of lipschitz_of_f1, alpha")
    value = phi(fn, xi, x)
    sq = (xi - x) ** 2
    lower = 0.5 * alpha * sq if alpha is not None else 0.0
    upper = 0.5 * lipschitz_of_f1 * sq if lipschitz_of_f1 is not None else math.inf
    slack = 1e-12 * (1.0 + abs(value))
    if value < lower - slack:
        raise BoundViolation(f"phi={value} below alpha bound {lower}")
    if value > upper + slack:
        raise BoundViolation(f"phi={value} above Lipschitz bound {upper}")
    return lower, value, upper
