"""Univariate densities: catalog, interval moments and affine rescaling.

Every model carries its density and support.  Where the antiderivatives of
``f``, ``x f`` and ``x**2 f`` are elementary they are attached as *partial
moments* measured from the lower end of the support; all other integrals go
through adaptive quadrature.  Families with unbounded support also carry
the matching *upper* partial moments (measured to the upper end), which are
used for cells lying right of ``split`` so that tail cells do not lose their
digits to cancellation against the total mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

from .errors import ParameterError, UnknownDistributionError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_intervals

__all__ = [
    "SupportInterval",
    "AffineMap",
    "DistributionModel",
    "CATALOG",
    "TABULATED",
    "catalog_make",
    "family_defaults",
    "custom_model",
    "affine_model",
    "affine_pushforward",
    "probability_mass",
    "partial_expectation",
    "partial_second_moment_about",
    "interval_moments",
    "second_moments_about",
    "mean",
    "variance",
]

SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SupportInterval:
    """Extended-real interval ``[lower, upper]``; the bounds may be +-inf."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("support bounds must not be NaN")
        if lo == math.inf or hi == -math.inf or not lo < hi:
            raise ValueError(f"invalid support [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def interior(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x < self.upper)

    def __str__(self):
        left = "(" if math.isinf(self.lower) else "["
        right = ")" if math.isinf(self.upper) else "]"
        return f"{left}{self.lower:g}, {self.upper:g}{right}"


@dataclass(frozen=True)
class AffineMap:
    """``x -> mu + sigma * x`` with ``sigma > 0``."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("affine map parameters must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


Partial = Optional[Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class DistributionModel:
    """A univariate density together with whatever closed forms it admits.

    ``cdf_partial``, ``first_moment_partial`` and ``second_moment_partial``
    map ``x`` to the integral of ``f``, ``t f`` and ``t**2 f`` over
    ``[support.lower, x]``.  ``upper_partials`` holds the same three
    integrals over ``[x, support.upper]`` (entries may be ``None``).
    """

    name: str
    support: SupportInterval
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf_partial: Partial = None
    first_moment_partial: Partial = None
    second_moment_partial: Partial = None
    symmetric_about_zero: bool = False
    parameters: Mapping[str, float] = field(default_factory=dict)
    upper_partials: Optional[tuple] = None
    split: float = math.inf
    base: Optional["DistributionModel"] = None
    transform: Optional[AffineMap] = None
    quadrature: QuadratureConfig = DEFAULT_CONFIG
    breakpoints: tuple = ()

    def lower_partial(self, order: int) -> Partial:
        return (self.cdf_partial, self.first_moment_partial, self.second_moment_partial)[order]

    def upper_partial(self, order: int) -> Partial:
        if self.upper_partials is None:
            return None
        return self.upper_partials[order]

    @property
    def has_closed_forms(self) -> bool:
        return any(self.lower_partial(p) is not None for p in range(3))

    def without_closed_forms(self) -> "DistributionModel":
        """Same density, every integral routed through quadrature."""
        base = self.base.without_closed_forms() if self.base is not None else None
        return replace(self, cdf_partial=None, first_moment_partial=None,
                       second_moment_partial=None, upper_partials=None, base=base)

    def __repr__(self):
        params = ", ".join(f"{k}={v:g}" for k, v in self.parameters.items())
        return f"DistributionModel({self.name}({params}) on {self.support})"


# --------------------------------------------------------------------------
# helpers for closed forms

def _guard(fn, at_lower, at_upper, support):
    """Vectorise ``fn`` on the support and pin its values at the two ends."""
    lo, hi = support

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty_like(flat)
        below = flat <= lo
        above = flat >= hi
        mid = ~(below | above)
        out[below] = at_lower
        out[above] = at_upper
        if mid.any():
            out[mid] = fn(flat[mid])
        return out.reshape(x.shape) if x.ndim else out[0]

    return wrapped


def _pdf_on(fn, support):
    lo, hi = support

    def pdf(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros_like(flat)
        inside = (flat >= lo) & (flat <= hi) & np.isfinite(flat)
        if inside.any():
            out[inside] = fn(flat[inside])
        return out.reshape(x.shape) if x.ndim else out[0]

    return pdf


def _build(name, support, pdf, lower, upper, totals, *, symmetric=False,
           parameters=None, split=math.inf, breakpoints=()):
    """Assemble a model; ``totals`` are the full-support moments of order 0..2."""
    sup = SupportInterval(*support)
    ends = (sup.lower, sup.upper)
    guarded_lower = [None if fn is None else _guard(fn, 0.0, totals[p], ends)
                     for p, fn in enumerate(lower)]
    guarded_upper = None
    if upper is not None:
        guarded_upper = tuple(None if fn is None else _guard(fn, totals[p], 0.0, ends)
                              for p, fn in enumerate(upper))
    return DistributionModel(
        name=name,
        support=sup,
        pdf=_pdf_on(pdf, ends),
        cdf_partial=guarded_lower[0],
        first_moment_partial=guarded_lower[1],
        second_moment_partial=guarded_lower[2],
        symmetric_about_zero=symmetric,
        parameters=dict(parameters or {}),
        upper_partials=guarded_upper,
        split=split,
        breakpoints=tuple(breakpoints),
    )


# --------------------------------------------------------------------------
# catalog families

def _normal(params):
    def phi(x):
        return np.exp(-0.5 * x * x) / SQRT2PI

    lower = (
        special.ndtr,
        lambda x: -phi(x),
        lambda x: special.ndtr(x) - x * phi(x),
    )
    upper = (
        lambda x: special.ndtr(-x),
        phi,
        lambda x: special.ndtr(-x) + x * phi(x),
    )
    return _build("normal", (-math.inf, math.inf), phi, lower, upper, (1.0, 0.0, 1.0),
                  symmetric=True, parameters=params, split=0.0)


def _exponential(params):
    lower = (
        lambda x: -np.expm1(-x),
        lambda x: -np.expm1(-x) - x * np.exp(-x),
        lambda x: 2.0 - (x * x + 2.0 * x + 2.0) * np.exp(-x),
    )
    upper = (
        lambda x: np.exp(-x),
        lambda x: (1.0 + x) * np.exp(-x),
        lambda x: (x * x + 2.0 * x + 2.0) * np.exp(-x),
    )
    return _build("exponential", (0.0, math.inf), lambda x: np.exp(-x), lower, upper,
                  (1.0, 1.0, 2.0), parameters=params, split=math.log(2.0))


def _laplace_lower(x):
    """Lower partial moments of 0.5*exp(-|x|), orders 0..2."""
    neg = x <= 0
    e_neg = np.exp(np.where(neg, x, -x))  # exp(-|x|)
    m0 = np.where(neg, 0.5 * e_neg, 1.0 - 0.5 * e_neg)
    m1 = np.where(neg, 0.5 * (x - 1.0) * e_neg, -0.5 * (1.0 + x) * e_neg)
    m2 = np.where(neg, 0.5 * (x * x - 2.0 * x + 2.0) * e_neg,
                  2.0 - 0.5 * (x * x + 2.0 * x + 2.0) * e_neg)
    return m0, m1, m2


def _double_exponential(params):
    lower = tuple((lambda x, p=p: _laplace_lower(x)[p]) for p in range(3))
    upper = (
        lambda x: _laplace_lower(-x)[0],
        lambda x: -_laplace_lower(-x)[1],
        lambda x: _laplace_lower(-x)[2],
    )
    return _build("double-exponential", (-math.inf, math.inf),
                  lambda x: 0.5 * np.exp(-np.abs(x)), lower, upper, (1.0, 0.0, 2.0),
                  symmetric=True, parameters=params, split=0.0, breakpoints=(0.0,))


def _logistic(params):
    a = params["a"]

    def pdf(x):
        e = np.exp(-np.abs(x) / a)
        return e / (a * (1.0 + e) ** 2)

    def m1(x):
        # even in x: the mean is zero, so the lower and upper tails match
        ax = np.abs(x)
        return -ax * special.expit(-ax / a) - a * np.log1p(np.exp(-ax / a))

    lower = (lambda x: special.expit(x / a), m1, None)
    upper = (lambda x: special.expit(-x / a), lambda x: -m1(x), None)
    var = (math.pi * a) ** 2 / 3.0
    return _build("logistic", (-math.inf, math.inf), pdf, lower, upper, (1.0, 0.0, var),
                  symmetric=True, parameters=params, split=0.0)


def _t3_lower(x):
    """Lower partial moments of Student's t with 3 degrees of freedom."""
    s3 = math.sqrt(3.0)
    ax = np.abs(x)
    q = 3.0 + x * x
    with np.errstate(divide="ignore"):
        at = np.arctan2(s3, ax)  # arctan(sqrt(3)/|x|), pi/2 at 0
    left0 = (at - s3 * ax / q) / math.pi  # mass below -|x|
    m0 = np.where(x < 0, left0, 1.0 - left0)
    m1 = -3.0 * s3 / (math.pi * q)
    left2 = 3.0 * (at + s3 * ax / q) / math.pi  # int_{-inf}^{-|x|} t^2 f
    m2 = np.where(x < 0, left2, 3.0 - left2)
    return m0, m1, m2


def _student_t(params):
    k = params["k"]
    if k == 3:
        c3 = 6.0 * math.sqrt(3.0) / math.pi

        def pdf(x):
            return c3 / (3.0 + x * x) ** 2

        lower = tuple((lambda x, p=p: _t3_lower(x)[p]) for p in range(3))
        upper = (
            lambda x: _t3_lower(-x)[0],
            lambda x: -_t3_lower(-x)[1],
            lambda x: _t3_lower(-x)[2],
        )
        return _build("student-t", (-math.inf, math.inf), pdf, lower, upper, (1.0, 0.0, 3.0),
                      symmetric=True, parameters=params, split=0.0)

    lognorm = special.gammaln((k + 1) / 2) - special.gammaln(k / 2) - 0.5 * math.log(k * math.pi)

    def pdf(x):
        return np.exp(lognorm - 0.5 * (k + 1) * np.log1p(x * x / k))

    return _build("student-t", (-math.inf, math.inf), pdf, (None,) * 3, None, (1.0, 0.0, 0.0),
                  symmetric=True, parameters=params, split=0.0)


def _uniform(params):
    lower = (lambda x: x, lambda x: 0.5 * x * x, lambda x: x * x * x / 3.0)
    return _build("uniform", (0.0, 1.0), np.ones_like, lower, None, (1.0, 0.5, 1.0 / 3.0),
                  parameters=params)


def _is_int(v):
    return float(v).is_integer()


def _beta1(params):
    r, s = params["r"], params["s"]
    logb = special.betaln(r, s)

    def pdf(x):
        return np.exp(special.xlogy(r - 1, x) + special.xlog1py(s - 1, -x) - logb)

    lower = (None,) * 3
    totals = (1.0, 0.0, 0.0)
    if _is_int(r) and _is_int(s) and r + s <= 40:
        dens = (Polynomial.basis(int(r) - 1) * Polynomial([1.0, -1.0]) ** (int(s) - 1)
                / math.exp(logb))
        polys = [(dens * Polynomial.basis(p)).integ(lbnd=0.0) for p in range(3)]
        lower = tuple((lambda x, P=P: P(x)) for P in polys)
        totals = tuple(float(P(1.0)) for P in polys)
    elif r < 1 or s < 1:
        # An unbounded density at an end defeats quadrature near x = 1, where
        # nodes round onto the singularity; use incomplete beta functions.
        c1 = r / (r + s)
        c2 = c1 * (r + 1) / (r + s + 1)
        lower = (lambda x: special.betainc(r, s, x),
                 lambda x: c1 * special.betainc(r + 1, s, x),
                 lambda x: c2 * special.betainc(r + 2, s, x))
        upper = (lambda x: special.betainc(s, r, 1.0 - x),
                 lambda x: c1 * special.betainc(s, r + 1, 1.0 - x),
                 lambda x: c2 * special.betainc(s, r + 2, 1.0 - x))
        return _build("beta1", (0.0, 1.0), pdf, lower, upper, (1.0, c1, c2),
                      parameters=params, split=0.5)
    return _build("beta1", (0.0, 1.0), pdf, lower, None, totals, parameters=params)


def _beta2(params):
    r, s = params["r"], params["s"]
    logb = special.betaln(r, s)

    def pdf(x):
        return np.exp(special.xlogy(r - 1, x) - (r + s) * np.log1p(x) - logb)

    return _build("beta2", (0.0, math.inf), pdf, (None,) * 3, None, (1.0, 0.0, 0.0),
                  parameters=params)


def _gamma(params):
    a, b = params["a"], params["b"]
    lognorm = -b * math.log(a) - special.gammaln(b)

    def pdf(x):
        return np.exp(special.xlogy(b - 1, x) - x / a + lognorm)

    if not (_is_int(b) and b <= 170):
        return _build("gamma", (0.0, math.inf), pdf, (None,) * 3, None, (1.0, 0.0, 0.0),
                      parameters=params)

    m = int(b)

    def q(shape, z):
        # regularised upper incomplete gamma for integer shape
        term = np.ones_like(z)
        acc = np.ones_like(z)
        for i in range(1, shape):
            term = term * z / i
            acc = acc + term
        return np.exp(-z) * acc

    def upper_p(p):
        scale = a ** p * math.prod(range(m, m + p)) if p else 1.0
        return scale, (lambda x: scale * q(m + p, x / a))

    uppers, totals = [], []
    for p in range(3):
        total, fn = upper_p(p)
        uppers.append(fn)
        totals.append(total)
    lower = tuple((lambda x, fn=fn, t=t: t - fn(x)) for fn, t in zip(uppers, totals))
    return _build("gamma", (0.0, math.inf), pdf, lower, tuple(uppers), tuple(totals),
                  parameters=params, split=a * b)


_FAMILIES = {
    "normal": (_normal, {}, []),
    "exponential": (_exponential, {}, []),
    "double-exponential": (_double_exponential, {}, []),
    "beta1": (_beta1, {"r": 2.0, "s": 2.0},
              [("r", lambda p: p["r"] > 0, "r > 0"), ("s", lambda p: p["s"] > 0, "s > 0")]),
    "beta2": (_beta2, {"r": 1.0, "s": 3.0},
              [("r", lambda p: p["r"] > 0, "r > 0"), ("s", lambda p: p["s"] > 2, "s > 2")]),
    "gamma": (_gamma, {"a": 1.0 / math.sqrt(2.0), "b": 2.0},
              [("a", lambda p: p["a"] > 0, "a > 0"), ("b", lambda p: p["b"] > 0, "b > 0")]),
    "logistic": (_logistic, {"a": math.sqrt(3.0) / math.pi},
                 [("a", lambda p: p["a"] > 0, "a > 0")]),
    "student-t": (_student_t, {"k": 3.0},
                  [("k", lambda p: _is_int(p["k"]) and p["k"] >= 3, "k integer, k >= 3")]),
    "uniform": (_uniform, {}, []),
}

CATALOG = tuple(_FAMILIES)
# Families produced by ``table --dist all``; uniform is left out since its points are trivial.
TABULATED = ("normal", "exponential", "double-exponential", "beta1", "beta2",
             "gamma", "logistic", "student-t")


def family_defaults(name: str) -> dict[str, float]:
    """Default parameters of a catalog family (empty for parameter-free ones)."""
    try:
        return dict(_FAMILIES[name][1])
    except KeyError:
        raise UnknownDistributionError(
            f"unknown distribution {name!r}; choose one of {', '.join(CATALOG)}") from None


def catalog_make(name: str, parameters: Mapping[str, float] | None = None) -> DistributionModel:
    """Build a catalog distribution, filling defaults for missing parameters.

    >>> catalog_make("exponential").pdf(0.0)
    1.0
    """
    try:
        builder, defaults, checks = _FAMILIES[name]
    except KeyError:
        raise UnknownDistributionError(
            f"unknown distribution {name!r}; choose one of {', '.join(CATALOG)}") from None
    params = dict(defaults)
    for key, value in (parameters or {}).items():
        if key not in defaults:
            raise ParameterError(f"{name} has no parameter {key!r}")
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ParameterError(f"parameter {key} must be a real number") from None
        if not math.isfinite(value):
            raise ParameterError(f"parameter {key} must be finite")
        params[key] = value
    for key, ok, text in checks:
        if not ok(params):
            raise ParameterError(f"{name}: parameter {key}={params[key]:g} violates {text}")
    return builder(params)


def custom_model(pdf, lower: float, upper: float, *, name: str = "custom",
                 symmetric_about_zero: bool = False, normalize: bool = False,
                 parameters: Mapping[str, float] | None = None,
                 breakpoints=(),
                 quadrature: QuadratureConfig = DEFAULT_CONFIG) -> DistributionModel:
    """Wrap a user density; every integral is computed by quadrature.

    A declared symmetry is spot-checked on a grid, and the total mass must be
    1 to within 1e-10 unless ``normalize`` rescales the density.
    """
    support = SupportInterval(lower, upper)
    ends = (support.lower, support.upper)

    def vec(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(pdf(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(pdf(float(v))) for v in x])

    model = DistributionModel(name=name, support=support, pdf=_pdf_on(vec, ends),
                              parameters=dict(parameters or {}), quadrature=quadrature,
                              breakpoints=tuple(float(b) for b in breakpoints))
    total = float(probability_mass(model, support.lower, support.upper))
    if normalize:
        model = replace(model, pdf=_pdf_on(lambda x: vec(x) / total, ends))
    elif abs(total - 1.0) > 1e-10:
        raise ParameterError(f"custom density integrates to {total!r}, not 1")

    return _declare_symmetric(model) if symmetric_about_zero else model


def _declare_symmetric(model):
    support = model.support
    if support.lower != -support.upper:
        raise ParameterError("a symmetric density needs a support symmetric about 0")
    span = support.upper if math.isfinite(support.upper) else 10.0
    grid = np.linspace(0.0, span, 201)[1:-1]
    fp, fm = model.pdf(grid), model.pdf(-grid)
    if np.any(np.abs(fp - fm) > 1e-12 * np.maximum(1.0, fp)):
        raise ParameterError("density declared symmetric but f(x) != f(-x)")
    return replace(model, symmetric_about_zero=True, split=0.0)


def affine_model(model: DistributionModel, amap: AffineMap, *,
                 symmetric_about_zero: bool | None = None) -> DistributionModel:
    """Density of ``mu + sigma X`` where ``X`` follows ``model``.

    Interval moments are obtained from the base model by substitution, so any
    closed forms of the base carry over.  The result is flagged symmetric when
    the base is and ``mu == 0``; pass ``symmetric_about_zero=True`` to declare
    it otherwise (e.g. a uniform recentred on 0), which is spot-checked.
    """
    mu, sigma = amap.mu, amap.sigma
    lo = mu + sigma * model.support.lower
    hi = mu + sigma * model.support.upper

    def pdf(x):
        return model.pdf((np.asarray(x, dtype=float) - mu) / sigma) / sigma

    def z(x):
        return (np.asarray(x, dtype=float) - mu) / sigma

    f0, f1, f2 = (model.lower_partial(p) for p in range(3))
    cdf = (lambda x: f0(z(x))) if f0 else None
    first = (lambda x: mu * f0(z(x)) + sigma * f1(z(x))) if f0 and f1 else None
    second = ((lambda x: mu * mu * f0(z(x)) + 2 * mu * sigma * f1(z(x))
               + sigma * sigma * f2(z(x))) if f0 and f1 and f2 else None)
    params = dict(model.parameters)
    params.update(mu=mu, sigma=sigma)
    shifted = DistributionModel(
        name=model.name,
        support=SupportInterval(lo, hi),
        pdf=pdf,
        cdf_partial=cdf,
        first_moment_partial=first,
        second_moment_partial=second,
        symmetric_about_zero=model.symmetric_about_zero and mu == 0.0,
        parameters=params,
        split=mu + sigma * model.split if math.isfinite(model.split) else model.split,
        base=model,
        transform=amap,
        quadrature=model.quadrature,
        breakpoints=tuple(mu + sigma * b for b in model.breakpoints),
    )
    if symmetric_about_zero and not shifted.symmetric_about_zero:
        return _declare_symmetric(shifted)
    return shifted


def affine_pushforward(points, distortion: float, amap: AffineMap):
    """Principal points and distortion of ``mu + sigma X`` from those of ``X``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or np.any(np.diff(pts) <= 0):
        raise ValueError("points must be a strictly increasing 1-D array")
    if not distortion >= 0:
        raise ValueError("distortion must be non-negative")
    return amap.mu + amap.sigma * pts, amap.sigma ** 2 * float(distortion)


# --------------------------------------------------------------------------
# interval moments

def _as_bounds(lo, hi, support):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    if np.any(lo > hi):
        raise ValueError("interval bounds must satisfy lo <= hi")
    lo = np.clip(lo, support.lower, support.upper)
    hi = np.clip(hi, support.lower, support.upper)
    return lo, hi


def _closed_form(model, order, lo, hi):
    low = model.lower_partial(order)
    if low is None:
        return None
    up = model.upper_partial(order)
    if up is None:
        return low(hi) - low(lo)
    right = lo >= model.split
    out = np.empty(lo.shape)
    if (~right).any():
        out[~right] = low(hi[~right]) - low(lo[~right])
    if right.any():
        out[right] = up(lo[right]) - up(hi[right])
    return out


def _quad_raw(model, orders, lo, hi):
    pdf = model.pdf

    def integrand(x, _owner):
        f = pdf(x)
        return np.stack([f if p == 0 else x ** p * f for p in orders])

    vals, _, _ = integrate_intervals(integrand, lo.ravel(), hi.ravel(), model.quadrature,
                                     ncomp=len(orders), breakpoints=model.breakpoints)
    return vals.reshape((len(orders),) + lo.shape)


def interval_moments(model: DistributionModel, lo, hi, orders=(0, 1)) -> np.ndarray:
    """Integrals of ``x**p f(x)`` over ``[lo, hi]`` for each ``p`` in ``orders``.

    Returns an array of shape ``(len(orders),) + broadcast(lo, hi).shape``.
    """
    if model.transform is not None:
        return _affine_moments(model, lo, hi, orders)
    lo, hi = _as_bounds(lo, hi, model.support)
    out = np.empty((len(orders),) + lo.shape)
    missing = []
    for r, p in enumerate(orders):
        val = _closed_form(model, p, lo, hi)
        if val is None:
            missing.append(r)
        else:
            out[r] = val
    if missing:
        out[missing] = _quad_raw(model, [orders[r] for r in missing], lo, hi)
    return out


def _affine_moments(model, lo, hi, orders):
    mu, sigma = model.transform.mu, model.transform.sigma
    lo, hi = _as_bounds(lo, hi, model.support)
    zlo, zhi = (lo - mu) / sigma, (hi - mu) / sigma
    needed = sorted(set(range(max(orders) + 1)))
    base = interval_moments(model.base, zlo, zhi, tuple(needed))
    m0 = base[0]
    m1 = base[1] if len(needed) > 1 else None
    out = []
    for p in orders:
        if p == 0:
            out.append(m0)
        elif p == 1:
            out.append(mu * m0 + sigma * m1)
        else:
            out.append(mu * mu * m0 + 2 * mu * sigma * m1 + sigma * sigma * base[2])
    return np.stack(out)


def second_moments_about(model: DistributionModel, centers, lo, hi) -> np.ndarray:
    """Integrals of ``(x - c)**2 f(x)`` over ``[lo, hi]``, vectorised over cells."""
    centers = np.asarray(centers, dtype=float)
    if model.transform is not None:
        mu, sigma = model.transform.mu, model.transform.sigma
        lo, hi = _as_bounds(lo, hi, model.support)
        return sigma * sigma * second_moments_about(
            model.base, (centers - mu) / sigma, (lo - mu) / sigma, (hi - mu) / sigma)
    lo, hi = _as_bounds(lo, hi, model.support)
    centers = np.broadcast_to(centers, lo.shape)
    if all(model.lower_partial(p) is not None for p in range(3)):
        m0, m1, m2 = (_closed_form(model, p, lo, hi) for p in range(3))
        return np.maximum(m2 - 2.0 * centers * m1 + centers * centers * m0, 0.0)

    c_flat = centers.ravel()
    pdf = model.pdf

    def integrand(x, owner):
        d = x - c_flat[owner]
        return d * d * pdf(x)

    vals, _, _ = integrate_intervals(integrand, lo.ravel(), hi.ravel(), model.quadrature,
                                     breakpoints=model.breakpoints)
    return vals[0].reshape(lo.shape)


def _scalarise(value, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(np.asarray(value).reshape(-1)[0])
    return value


def probability_mass(model: DistributionModel, lo, hi):
    """Mass of ``[lo, hi]``; closed form when available, else quadrature."""
    return _scalarise(interval_moments(model, lo, hi, (0,))[0], lo, hi)


def partial_expectation(model: DistributionModel, lo, hi):
    """Integral of ``x f(x)`` over ``[lo, hi]``."""
    return _scalarise(interval_moments(model, lo, hi, (1,))[0], lo, hi)


def partial_second_moment_about(model: DistributionModel, center, lo, hi):
    """Integral of ``(x - center)**2 f(x)`` over ``[lo, hi]``."""
    return _scalarise(second_moments_about(model, center, lo, hi), center, lo, hi)


def mean(model: DistributionModel) -> float:
    if model.symmetric_about_zero:
        return 0.0
    s = model.support
    m0, m1 = interval_moments(model, s.lower, s.upper, (0, 1))
    return float(m1 / m0)


def variance(model: DistributionModel) -> float:
    s = model.support
    return float(partial_second_moment_about(model, mean(model), s.lower, s.upper))
