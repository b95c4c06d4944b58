"""Adaptive Gauss-Kronrod (7/15) quadrature on finite and infinite intervals.

The engine is batched: many intervals are integrated at once, each one
refined independently by bisecting its worst segment per round.  A single
interval therefore sees exactly the classical priority-queue order, while
the solver can push all Voronoi cells of a configuration through one set of
vectorised integrand calls.

Infinite endpoints are removed with the substitutions

    [c, inf)   : x = c + t / (1 - t),   dx = dt / (1 - t)**2
    (-inf, d]  : x = d - t / (1 - t),   dx = dt / (1 - t)**2

and an interval with an infinite end is split at 0 when it contains it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import QuadratureError

__all__ = [
    "QuadratureConfig",
    "IntegralEstimate",
    "MappedPiece",
    "DEFAULT_CONFIG",
    "integrate",
    "integrate_intervals",
    "map_infinite",
    "gk15",
]

# Kronrod abscissae (descending) and weights, QUADPACK qk15.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights belong to the odd-indexed Kronrod nodes (xgk[1], [3], [5], [7]).
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
GAUSS_WEIGHTS = np.zeros(15)
for _k, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_k] = _w
    GAUSS_WEIGHTS[14 - _k] = _w
GAUSS_WEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps
# Floor on a segment's error estimate: rounding in the 15-term sums.
_ROUNDOFF = 5.0 * _EPS
# Those floors add up and bisection cannot shrink them, so a request below
# twice their total is treated as met.
_NOISE = 2.0 * _ROUNDOFF

_FINITE, _RIGHT_INF, _LEFT_INF = 0, 1, 2


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-13
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error_estimate: float
    subdivisions: int


class MappedPiece(NamedTuple):
    """One finite-parameter piece of a (possibly infinite) interval."""

    lower: float
    upper: float
    t_lo: float
    t_hi: float
    x_of_t: Callable
    weight: Callable


def _x_of_t(kind, base, t):
    if kind == _RIGHT_INF:
        return base + t / (1.0 - t)
    if kind == _LEFT_INF:
        return base - t / (1.0 - t)
    return t


def _weight(kind, t):
    if kind == _FINITE:
        return np.ones_like(np.asarray(t, dtype=float))
    return 1.0 / (1.0 - t) ** 2


def map_infinite(lo: float, hi: float) -> list[MappedPiece]:
    """Substitutions turning an interval with an infinite end into [0, 1) pieces.

    ``[c, inf)`` and ``(-inf, d]`` give one piece each; ``(-inf, inf)`` is
    split at 0 into ``(-inf, 0]`` and ``[0, inf)``.
    """
    lo, hi = float(lo), float(hi)
    if np.isfinite(lo) and np.isfinite(hi):
        raise ValueError("map_infinite needs at least one infinite bound")
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")

    def piece(kind, base, lower, upper):
        return MappedPiece(
            lower, upper, 0.0, 1.0,
            lambda t, k=kind, b=base: _x_of_t(k, b, np.asarray(t, dtype=float)),
            lambda t, k=kind: _weight(k, np.asarray(t, dtype=float)),
        )

    if np.isinf(lo) and np.isinf(hi):
        return [piece(_LEFT_INF, 0.0, -np.inf, 0.0), piece(_RIGHT_INF, 0.0, 0.0, np.inf)]
    if np.isinf(hi):
        return [piece(_RIGHT_INF, lo, lo, np.inf)]
    return [piece(_LEFT_INF, hi, -np.inf, hi)]


def gk15(func, a, b):
    """One Gauss-Kronrod 7/15 panel on [a, b]; returns (kronrod, gauss)."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fx = np.asarray(func(center + half * NODES), dtype=float)
    return half * (KRONROD_WEIGHTS @ fx), half * (GAUSS_WEIGHTS @ fx)


def _panel(func, owner, kind, base, u, v, ncomp):
    """Evaluate GK15 on a batch of parameter-space segments.

    Returns per-segment Kronrod values, error estimates and integrals of
    ``|f|``, each of shape (ncomp, S).
    """
    half = 0.5 * (v - u)
    center = 0.5 * (u + v)
    t = center[:, None] + half[:, None] * NODES[None, :]
    x = np.empty_like(t)
    w = np.ones_like(t)
    fin = kind == _FINITE
    x[fin] = t[fin]
    right = kind == _RIGHT_INF
    if right.any():
        tr = t[right]
        x[right] = base[right, None] + tr / (1.0 - tr)
        w[right] = 1.0 / (1.0 - tr) ** 2
    left = kind == _LEFT_INF
    if left.any():
        tl = t[left]
        x[left] = base[left, None] - tl / (1.0 - tl)
        w[left] = 1.0 / (1.0 - tl) ** 2

    S = len(u)
    fx = np.asarray(func(x.ravel(), np.repeat(owner, 15)), dtype=float)
    fx = fx.reshape(ncomp, S, 15) * w[None, :, :]
    resk = fx @ KRONROD_WEIGHTS
    resg = fx @ GAUSS_WEIGHTS
    resabs = np.abs(fx) @ KRONROD_WEIGHTS
    resasc = np.abs(fx - 0.5 * resk[..., None]) @ KRONROD_WEIGHTS
    diff = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            (resasc > 0) & (diff > 0),
            resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5),
            diff,
        )
    err = np.maximum(scaled, _ROUNDOFF * resabs)
    h = np.abs(half)[None, :]
    return resk * half[None, :], err * h, resabs * h


def _seed(lo, hi, breakpoints=()):
    """Initial parameter-space segments for each interval.

    Intervals are cut at every breakpoint strictly inside them.  An interval
    with an infinite end that contains 0 is also cut there, so the tail map
    starts where the catalog densities keep their mass.
    """
    owner, kind, base, u, v = [], [], [], [], []
    bps = np.sort(np.asarray(breakpoints, dtype=float).ravel())
    for i, (a, b) in enumerate(zip(lo, hi)):
        if a == b:
            continue
        cuts = [float(c) for c in bps if a < c < b]
        if (np.isinf(a) or np.isinf(b)) and a < 0.0 < b and 0.0 not in cuts:
            cuts = sorted(cuts + [0.0])
        edges = [a] + cuts + [b]
        for x0, x1 in zip(edges[:-1], edges[1:]):
            owner.append(i)
            if np.isfinite(x0) and np.isfinite(x1):
                kind.append(_FINITE); base.append(0.0); u.append(x0); v.append(x1)
            elif np.isfinite(x0):
                kind.append(_RIGHT_INF); base.append(x0); u.append(0.0); v.append(1.0)
            else:
                kind.append(_LEFT_INF); base.append(x1); u.append(0.0); v.append(1.0)
    return (np.array(owner, dtype=np.intp), np.array(kind, dtype=np.int8),
            np.array(base, dtype=float), np.array(u, dtype=float), np.array(v, dtype=float))


def _validate_bounds(lo, hi):
    if np.isnan(lo).any() or np.isnan(hi).any():
        raise ValueError("integration bounds must not be NaN")
    if (lo > hi).any():
        raise ValueError("integration bounds must satisfy lo <= hi")
    if (np.isposinf(lo) | np.isneginf(hi)).any():
        raise ValueError("an infinite bound must point outwards")


def integrate_intervals(func, lo, hi, config: QuadratureConfig | None = None, ncomp: int = 1,
                        breakpoints=()):
    """Integrate a (vector-valued) integrand over many intervals at once.

    Parameters
    ----------
    func : callable
        ``func(x, owner)`` with ``x`` a flat array of nodes and ``owner`` the
        index of the interval each node belongs to.  Must return an array of
        shape ``(ncomp, len(x))`` (or ``(len(x),)`` when ``ncomp == 1``).
    lo, hi : array_like
        Interval bounds; ``-inf``/``inf`` are allowed.  ``lo == hi`` gives 0.
    config : QuadratureConfig, optional
    ncomp : int
        Number of integrand components, integrated on shared nodes.
    breakpoints : sequence of float
        Points where the integrand is not smooth; intervals are split there.

    Returns
    -------
    values, errors : ndarray, shape (ncomp, m)
    subdivisions : ndarray of int, shape (m,)

    Raises
    ------
    QuadratureError
        If some interval needs more than ``config.max_subdivisions`` bisections.
    """
    config = config or DEFAULT_CONFIG
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    _validate_bounds(lo, hi)
    m = lo.size

    owner, kind, base, u, v = _seed(lo.ravel(), hi.ravel(), breakpoints)
    values = np.zeros((ncomp, m))
    errors = np.zeros((ncomp, m))
    subdivisions = np.zeros(m, dtype=np.intp)
    if owner.size == 0:
        return values, errors, subdivisions

    def call(x, own):
        out = np.asarray(func(x, own), dtype=float)
        return out.reshape(ncomp, -1)

    seg_val, seg_err, seg_abs = _panel(call, owner, kind, base, u, v, ncomp)
    abs_tol, rel_tol = config.abs_tol, config.rel_tol
    limit = int(config.max_subdivisions)

    while True:
        absint = np.zeros((ncomp, m))
        for c in range(ncomp):
            values[c] = np.bincount(owner, weights=seg_val[c], minlength=m)
            errors[c] = np.bincount(owner, weights=seg_err[c], minlength=m)
            absint[c] = np.bincount(owner, weights=seg_abs[c], minlength=m)
        tol = np.maximum(np.maximum(abs_tol, rel_tol * np.abs(values)), _NOISE * absint)
        bad = (errors > tol).any(axis=0)
        if not bad.any():
            break

        # worst segment (relative to its interval's tolerance) of each bad interval
        score = (seg_err / tol[:, owner]).max(axis=0)
        score[~bad[owner]] = -1.0
        order = np.lexsort((score, owner))
        last = np.ones(order.size, dtype=bool)
        last[:-1] = owner[order][1:] != owner[order][:-1]
        pick = order[last]
        pick = pick[score[pick] >= 0]

        subdivisions[owner[pick]] += 1
        over = subdivisions > limit
        if over.any():
            i = int(np.flatnonzero(over)[0])
            raise QuadratureError(
                f"quadrature did not converge on [{lo.ravel()[i]}, {hi.ravel()[i]}] "
                f"after {limit} subdivisions",
                value=float(values[0, i]), error_estimate=float(errors[0, i]),
            )
        mid = 0.5 * (u[pick] + v[pick])
        if ((mid <= u[pick]) | (mid >= v[pick])).any():
            i = int(owner[pick][(mid <= u[pick]) | (mid >= v[pick])][0])
            raise QuadratureError(
                f"quadrature hit the floating-point resolution on "
                f"[{lo.ravel()[i]}, {hi.ravel()[i]}]",
                value=float(values[0, i]), error_estimate=float(errors[0, i]),
            )
        new_owner = np.concatenate([owner[pick], owner[pick]])
        new_kind = np.concatenate([kind[pick], kind[pick]])
        new_base = np.concatenate([base[pick], base[pick]])
        new_u = np.concatenate([u[pick], mid])
        new_v = np.concatenate([mid, v[pick]])
        nv, ne, na = _panel(call, new_owner, new_kind, new_base, new_u, new_v, ncomp)

        keep = np.ones(owner.size, dtype=bool)
        keep[pick] = False
        owner = np.concatenate([owner[keep], new_owner])
        kind = np.concatenate([kind[keep], new_kind])
        base = np.concatenate([base[keep], new_base])
        u = np.concatenate([u[keep], new_u])
        v = np.concatenate([v[keep], new_v])
        seg_val = np.concatenate([seg_val[:, keep], nv], axis=1)
        seg_err = np.concatenate([seg_err[:, keep], ne], axis=1)
        seg_abs = np.concatenate([seg_abs[:, keep], na], axis=1)

    return values, errors, subdivisions


def _vectorised(integrand):
    """Wrap a scalar or vectorised integrand so it maps arrays to arrays."""
    def f(x, _owner):
        try:
            y = np.asarray(integrand(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(integrand(float(xi))) for xi in x])
    return f


def integrate(integrand, lo, hi, config: QuadratureConfig | None = None,
              breakpoints=()) -> IntegralEstimate:
    """Adaptive quadrature of a scalar integrand over ``[lo, hi]``.

    ``lo``/``hi`` may be infinite.  Raises :class:`QuadratureError` when the
    subdivision budget runs out; the exception carries the best estimate.

    >>> round(integrate(lambda x: x, 0.0, 1.0).value, 14)
    0.5
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError("integrate requires lo < hi")
    vals, errs, subs = integrate_intervals(_vectorised(integrand), [lo], [hi], config,
                                           breakpoints=breakpoints)
    return IntegralEstimate(float(vals[0, 0]), float(errs[0, 0]), int(subs[0]))
