"""Newton's method for principal points.

For sorted points ``a_1 < ... < a_n`` with cell edges ``m_0 = c``,
``m_j = (a_j + a_{j+1}) / 2`` and ``m_n = d``, the points are principal
(self-consistent) when every

    g_j = a_j * P_j - E_j,   P_j = int_{m_{j-1}}^{m_j} f,   E_j = int_{m_{j-1}}^{m_j} x f

vanishes.  ``g_j`` depends only on ``a_{j-1}, a_j, a_{j+1}`` so the Jacobian
is tridiagonal, and it is symmetric:

    dg_j/da_j     = P_j - f(m_{j-1}) l_{j-1} / 4 - f(m_j) l_j / 4
    dg_j/da_{j+1} = -f(m_j) l_j / 4,          l_j = a_{j+1} - a_j,

with ``l_0 = l_n = 0``.  Symmetric densities are solved on the half line
and mirrored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri

from . import _backend
from .distributions import (
    DistributionModel,
    SupportInterval,
    interval_moments,
    mean,
    partial_expectation,
    second_moments_about,
    variance,
)
from .errors import ConvergenceError, OrderingError, SingularMatrixError

__all__ = [
    "TridiagonalMatrix",
    "NewtonConfig",
    "SolverReport",
    "PATHS",
    "midpoints",
    "residual",
    "jacobian",
    "tridiag_solve",
    "initial_guess",
    "newton_iterate",
    "newton_solve",
    "solve_symmetric_n2",
    "solve_symmetric_n3",
    "solve_symmetric_even",
    "solve_symmetric_odd",
    "distortion",
    "self_consistency_gap",
]

PATHS = ("explicit-mean", "symmetric-n2", "symmetric-n3", "symmetric-even",
         "symmetric-odd", "general")

_DERIVATIVE_FLOOR = 1e-30


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if len(self.offdiag) != max(len(self.diag) - 1, 0):
            raise ValueError("off-diagonal must have n - 1 entries")

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-15
    max_iterations: int = 200
    max_step_halvings: int = 30

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.max_iterations > 0 and self.max_step_halvings > 0):
            raise ValueError("NewtonConfig fields must be positive")


@dataclass
class SolverReport:
    points: np.ndarray
    residual_inf_norm: float
    iterations: int
    distortion: float
    path: str
    residual_history: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.points)


def _check_alpha(alpha, support: SupportInterval) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("alpha must be a non-empty 1-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError("alpha must be finite")
    if np.any(np.diff(a) <= 0):
        raise ValueError("alpha must be strictly increasing")
    if not (a[0] > support.lower and a[-1] < support.upper):
        raise ValueError(f"alpha must lie inside the support {support}")
    return a


def _edges(a, lower, upper, free_left=False):
    m = np.empty(a.size + 1)
    m[0] = 0.5 * a[0] if free_left else lower
    m[1:-1] = 0.5 * (a[:-1] + a[1:])
    m[-1] = upper
    return m


def midpoints(alpha, support: SupportInterval) -> np.ndarray:
    """Cell edges ``m_0 = c, m_j = (a_j + a_{j+1})/2, m_n = d``."""
    a = _check_alpha(alpha, support)
    return _edges(a, support.lower, support.upper)


def _system(model, a, lower, upper, free_left=False):
    """Residual of the (possibly reduced) system plus the pieces the Jacobian reuses."""
    m = _edges(a, lower, upper, free_left)
    P, E = interval_moments(model, m[:-1], m[1:], (0, 1))
    return a * P - E, P, m


def _jacobian(model, a, P, m, free_left=False):
    ell = np.diff(a)
    fm = model.pdf(m[1:-1]) if a.size > 1 else np.empty(0)
    off = -0.25 * fm * ell
    diag = P.copy()
    diag[:-1] += off
    diag[1:] += off
    if free_left:
        # left edge a_1/2 moves with a_1
        diag[0] -= 0.25 * float(model.pdf(m[0])) * a[0]
    return TridiagonalMatrix(diag, off)


def residual(model: DistributionModel, alpha) -> np.ndarray:
    """Self-consistency residual ``g(alpha)`` over the full support."""
    a = _check_alpha(alpha, model.support)
    g, _, _ = _system(model, a, model.support.lower, model.support.upper)
    return g


def jacobian(model: DistributionModel, alpha) -> TridiagonalMatrix:
    """Analytic Jacobian of :func:`residual`.

    The density at an infinite edge counts as 0, which the ``l_0 = l_n = 0``
    convention makes irrelevant anyway.
    """
    a = _check_alpha(alpha, model.support)
    _, P, m = _system(model, a, model.support.lower, model.support.upper)
    return _jacobian(model, a, P, m)


def tridiag_solve(J: TridiagonalMatrix, rhs) -> np.ndarray:
    """Solve ``J x = rhs`` in O(n) (no pivoting).

    Raises :class:`SingularMatrixError` when a pivot drops below 1e-30.
    """
    diag = np.ascontiguousarray(J.diag, dtype=float)
    off = np.ascontiguousarray(J.offdiag, dtype=float)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    return _backend.thomas_solve(diag, off, rhs)


def _interval_guess(model, lower, upper, k):
    j = np.arange(1, k + 1, dtype=float)
    if math.isfinite(lower) and math.isfinite(upper):
        return lower + j * (upper - lower) / (k + 1)
    if math.isfinite(lower):
        return lower + (np.ones(1) if k == 1 else 1.0 + (j - 1) / (k - 1))
    if math.isfinite(upper):
        return upper - (np.ones(1) if k == 1 else 1.0 + (k - j) / (k - 1))
    # normal-quantile spacing keeps the outer points inside the bulk
    centre, spread = mean(model), math.sqrt(variance(model))
    return centre + spread * ndtri((j - 0.5) / k)


def _half_guess(model, k):
    return _interval_guess(model, 0.0, model.support.upper, k)


def _mirror(half, with_zero):
    mid = [0.0] if with_zero else []
    return np.concatenate([-half[::-1], mid, half])


def initial_guess(model: DistributionModel, n: int, *, use_symmetry: bool = True) -> np.ndarray:
    """Starting points for Newton (and Lloyd).

    ``[0, inf)``: ``a_j = 1 + (j-1)/(n-1)``; ``[c, d]``: ``a_j = c + j(d-c)/(n+1)``.
    Symmetric densities get the half-line rule for ``n // 2`` points, mirrored
    (a single half-line point is 1, or ``d/2`` on a bounded support).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if use_symmetry and model.symmetric_about_zero and n >= 2:
        return _mirror(_half_guess(model, n // 2), n % 2 == 1)
    s = model.support
    return _interval_guess(model, s.lower, s.upper, n)


def _admissible(a, lower, upper, free_left):
    if not np.all(np.isfinite(a)) or np.any(np.diff(a) <= 0):
        return False
    left = 0.0 if free_left else lower
    return a[0] > left and a[-1] < upper


def newton_iterate(model: DistributionModel, alpha0, config: NewtonConfig | None = None, *,
                   lower: float | None = None, upper: float | None = None,
                   free_left: bool = False, callback: Optional[Callable] = None):
    """Newton iteration ``a <- a - J(a)^{-1} g(a)`` on one interval.

    By default the system lives on the model's support.  ``lower``/``upper``
    restrict it (the half line for symmetric reductions); ``free_left`` makes
    the left edge ``a_1 / 2``, as needed for an odd symmetric reduction whose
    centre point sits at 0.  Steps are halved only to keep the iterate
    strictly increasing and inside the interval.

    Returns ``(points, residual_inf_norm, iterations, residual_history)``.
    """
    config = config or NewtonConfig()
    lower = model.support.lower if lower is None else lower
    upper = model.support.upper if upper is None else upper
    a = np.array(alpha0, dtype=float)
    if not _admissible(a, lower, upper, free_left):
        raise ValueError("initial points must be strictly increasing and interior")
    history = []
    for it in range(config.max_iterations + 1):
        g, P, m = _system(model, a, lower, upper, free_left)
        r = float(np.max(np.abs(g)))
        history.append(r)
        if callback is not None:
            callback(a.copy(), r)
        if r < config.residual_tol:
            return a, r, it, history
        if it == config.max_iterations:
            break
        J = _jacobian(model, a, P, m, free_left)
        step = tridiag_solve(J, g)
        t = 1.0
        for _ in range(config.max_step_halvings + 1):
            cand = a - t * step
            if _admissible(cand, lower, upper, free_left):
                break
            t *= 0.5
        else:
            raise OrderingError(
                f"step halving failed to keep {model.name} points ordered at iteration {it}",
                points=a, residual=r, iterations=it)
        a = cand
    raise ConvergenceError(
        f"Newton did not reach |g| < {config.residual_tol:g} for {model.name} "
        f"({a.size}-point system) in {config.max_iterations} iterations (|g| = {r:.3g})",
        points=a, residual=r, iterations=config.max_iterations)


def _require_symmetric(model):
    if not model.symmetric_about_zero:
        raise ValueError(f"{model.name} is not flagged symmetric about 0")


def solve_symmetric_n2(model: DistributionModel) -> np.ndarray:
    """Two principal points ``-phi, phi`` with ``phi = 2 int_0^d x f``."""
    _require_symmetric(model)
    phi = 2.0 * partial_expectation(model, 0.0, model.support.upper)
    return np.array([-phi, phi])


def _symmetric_n3(model, config):
    d = model.support.upper
    a = 1.0 if math.isinf(d) else 0.5 * d
    history = []
    for it in range(config.max_iterations + 1):
        P, E = interval_moments(model, 0.5 * a, d, (0, 1))
        g = a * float(P) - float(E)
        history.append(abs(g))
        if abs(g) < config.residual_tol:
            return a, it, history
        if it == config.max_iterations:
            break
        dg = float(P) - 0.25 * a * float(model.pdf(0.5 * a))
        if abs(dg) < _DERIVATIVE_FLOOR:
            raise SingularMatrixError(f"g'(a) underflow at a={a!r}")
        step = g / dg
        t = 1.0
        for _ in range(config.max_step_halvings + 1):
            cand = a - t * step
            if 0.0 < cand < d:
                break
            t *= 0.5
        else:
            raise OrderingError("step halving failed in the n=3 reduction",
                                points=np.array([-a, 0.0, a]), residual=abs(g), iterations=it)
        a = cand
    raise ConvergenceError("scalar Newton did not converge for n=3",
                           points=np.array([-a, 0.0, a]), residual=abs(g),
                           iterations=config.max_iterations)


def solve_symmetric_n3(model: DistributionModel, config: NewtonConfig | None = None) -> np.ndarray:
    """Three principal points ``-a, 0, a`` via scalar Newton on
    ``g(a) = a int_{a/2}^d f - int_{a/2}^d x f``."""
    _require_symmetric(model)
    a, _, _ = _symmetric_n3(model, config or NewtonConfig())
    return np.array([-a, 0.0, a])


def _symmetric_half(model, n, config, odd):
    half0 = _half_guess(model, (n - 1) // 2 if odd else n // 2)
    half, _, it, history = newton_iterate(model, half0, config, lower=0.0,
                                          upper=model.support.upper, free_left=odd)
    return _mirror(half, odd), it, history


def solve_symmetric_even(model: DistributionModel, n: int,
                         config: NewtonConfig | None = None) -> np.ndarray:
    """Even ``n >= 4``: solve ``n/2`` points on ``[0, d)`` and mirror."""
    _require_symmetric(model)
    if n < 4 or n % 2:
        raise ValueError("solve_symmetric_even needs an even n >= 4")
    return _symmetric_half(model, n, config or NewtonConfig(), odd=False)[0]


def solve_symmetric_odd(model: DistributionModel, n: int,
                        config: NewtonConfig | None = None) -> np.ndarray:
    """Odd ``n >= 5``: solve ``(n-1)/2`` points on ``[a_1/2, d)``, mirror, add 0."""
    _require_symmetric(model)
    if n < 5 or n % 2 == 0:
        raise ValueError("solve_symmetric_odd needs an odd n >= 5")
    return _symmetric_half(model, n, config or NewtonConfig(), odd=True)[0]


def distortion(model: DistributionModel, alpha) -> float:
    """Mean squared distance ``sum_j int_{cell j} (x - a_j)^2 f``."""
    a = _check_alpha(alpha, model.support)
    m = _edges(a, model.support.lower, model.support.upper)
    return float(np.sum(second_moments_about(model, a, m[:-1], m[1:])))


def newton_solve(model: DistributionModel, n: int, config: NewtonConfig | None = None, *,
                 use_symmetry: bool = True, callback: Optional[Callable] = None) -> SolverReport:
    """Compute ``n`` principal points of ``model``.

    ``n = 1`` returns the mean.  Densities flagged symmetric about 0 use the
    closed form (``n = 2``), scalar Newton (``n = 3``) or the half-line
    reductions (``n >= 4``) unless ``use_symmetry`` is false; everything else
    runs the full n-dimensional Newton iteration.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    config = config or NewtonConfig()
    s = model.support
    history: list = []
    iterations = 0
    symmetric = use_symmetry and model.symmetric_about_zero

    if n == 1:
        points, path = np.array([mean(model)]), "explicit-mean"
    elif symmetric and n == 2:
        points, path = solve_symmetric_n2(model), "symmetric-n2"
    elif symmetric and n == 3:
        a, iterations, history = _symmetric_n3(model, config)
        points, path = np.array([-a, 0.0, a]), "symmetric-n3"
    elif symmetric:
        odd = n % 2 == 1
        points, iterations, history = _symmetric_half(model, n, config, odd)
        path = "symmetric-odd" if odd else "symmetric-even"
    else:
        points, _, iterations, history = newton_iterate(
            model, initial_guess(model, n, use_symmetry=False), config, callback=callback)
        path = "general"

    g, _, m = _system(model, points, s.lower, s.upper)
    dist = float(np.sum(second_moments_about(model, points, m[:-1], m[1:])))
    return SolverReport(points=points, residual_inf_norm=float(np.max(np.abs(g))),
                        iterations=iterations, distortion=dist, path=path,
                        residual_history=history)


def self_consistency_gap(model: DistributionModel, alpha) -> np.ndarray:
    """``a_j - E[X | X in cell j]`` for every cell."""
    a = _check_alpha(alpha, model.support)
    m = _edges(a, model.support.lower, model.support.upper)
    P, E = interval_moments(model, m[:-1], m[1:], (0, 1))
    return a - E / P

