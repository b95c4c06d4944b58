"""Independent checks on the Newton solver.

Lloyd's fixed-point iteration and an exact dynamic program over a fine
discretization solve the same problem without derivatives; a central
difference Jacobian checks the analytic one.  The student-t experiment
tracks how t principal points approach the normal ones as k grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .distributions import (
    DistributionModel,
    catalog_make,
    interval_moments,
    probability_mass,
)
from .errors import ConvergenceError, ZeroMassCellError
from .solver import (
    NewtonConfig,
    _edges,
    _check_alpha,
    initial_guess,
    jacobian,
    newton_solve,
    residual,
)

__all__ = [
    "LloydConfig",
    "ConvergenceSeries",
    "JacobianCheck",
    "Discretization",
    "IterationRecord",
    "lloyd_iterate",
    "lloyd_solve",
    "discretize",
    "grid_bruteforce",
    "jacobian_fd_check",
    "t_convergence_experiment",
    "iteration_study",
]

_ZERO_MASS = 1e-30
_TAIL_MASS = 1e-8
MAX_GRID_POINTS = 2000
MAX_DP_POINTS = 4


@dataclass(frozen=True)
class LloydConfig:
    tol: float = 1e-13
    max_iterations: int = 100_000

    def __post_init__(self):
        if not (self.tol > 0 and self.max_iterations > 0):
            raise ValueError("LloydConfig fields must be positive")


@dataclass(frozen=True)
class ConvergenceSeries:
    n: int
    k_values: np.ndarray
    deviations: np.ndarray

    def __post_init__(self):
        if len(self.k_values) != len(self.deviations):
            raise ValueError("k_values and deviations must be aligned")


class JacobianCheck(NamedTuple):
    deviation: float
    offband: float


class Discretization(NamedTuple):
    edges: np.ndarray
    weights: np.ndarray
    positions: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.edges[1] - self.edges[0])


class IterationRecord(NamedTuple):
    n: int
    iterations: int | None
    residual: float
    error: str | None = None


def lloyd_iterate(model: DistributionModel, alpha) -> np.ndarray:
    """One Lloyd step: every point moves to the conditional mean of its cell."""
    a = _check_alpha(alpha, model.support)
    m = _edges(a, model.support.lower, model.support.upper)
    P, E = interval_moments(model, m[:-1], m[1:], (0, 1))
    empty = np.flatnonzero(P < _ZERO_MASS)
    if empty.size:
        j = int(empty[0])
        raise ZeroMassCellError(f"cell {j + 1} [{m[j]!r}, {m[j + 1]!r}] carries no mass")
    return E / P


def lloyd_solve(model: DistributionModel, n: int, config: LloydConfig | None = None, *,
                movements: list | None = None) -> np.ndarray:
    """Iterate :func:`lloyd_iterate` from the Newton starting points until the
    largest move is below ``config.tol``.

    If ``movements`` is a list, the max movement of every step is appended.
    """
    config = config or LloydConfig()
    if n < 1:
        raise ValueError("n must be >= 1")
    a = initial_guess(model, n)
    for it in range(1, config.max_iterations + 1):
        nxt = lloyd_iterate(model, a)
        move = float(np.max(np.abs(nxt - a)))
        if movements is not None:
            movements.append(move)
        a = nxt
        if move < config.tol:
            return a
    raise ConvergenceError(f"Lloyd iteration did not settle within {config.max_iterations} steps",
                           points=a, residual=move, iterations=config.max_iterations)


def _tail_cut(model, side):
    """Point beyond which at most ``_TAIL_MASS`` lies, by bisection on mass."""
    s = model.support
    finite_end = s.lower if side < 0 else s.upper
    if math.isfinite(finite_end):
        return finite_end
    inner = s.upper if side < 0 else s.lower
    anchor = 0.0 if not math.isfinite(inner) else inner
    step = 1.0

    def tail(x):
        return probability_mass(model, s.lower, x) if side < 0 else probability_mass(model, x, s.upper)

    inside, outside = anchor, anchor + side * step
    while tail(outside) > _TAIL_MASS:
        inside, step = outside, 2.0 * step
        outside = anchor + side * step
    for _ in range(200):
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        if tail(mid) > _TAIL_MASS:
            inside = mid
        else:
            outside = mid
    return outside


def discretize(model: DistributionModel, grid_points: int = MAX_GRID_POINTS) -> Discretization:
    """Equal-width cells over the support, clipped to ``1 - 2e-8`` of the mass.

    Each non-empty cell becomes an atom at its conditional mean.
    """
    if not 1 <= grid_points <= MAX_GRID_POINTS:
        raise ValueError(f"grid_points must be in [1, {MAX_GRID_POINTS}]")
    edges = np.linspace(_tail_cut(model, -1), _tail_cut(model, +1), grid_points + 1)
    P, E = interval_moments(model, edges[:-1], edges[1:], (0, 1))
    keep = P > 0
    return Discretization(edges, P[keep], E[keep] / P[keep])


def grid_bruteforce(model: DistributionModel, n: int,
                    grid_points: int = MAX_GRID_POINTS) -> np.ndarray:
    """Globally optimal ``n`` points of the discretized measure.

    The optimum groups atoms into contiguous runs, so an interval dynamic
    program finds it exactly; the points are the weighted run centroids.
    """
    if not 1 <= n <= MAX_DP_POINTS:
        raise ValueError(f"the brute-force oracle supports 1 <= n <= {MAX_DP_POINTS}")
    grid = discretize(model, grid_points)
    if n > grid.weights.size:
        raise ValueError("more points than atoms")
    cuts = _backend.dp_partition(np.ascontiguousarray(grid.weights),
                                 np.ascontiguousarray(grid.positions), n)
    wx = grid.weights * grid.positions
    return np.array([wx[i:j].sum() / grid.weights[i:j].sum()
                     for i, j in zip(cuts[:-1], cuts[1:])])


def jacobian_fd_check(model: DistributionModel, alpha, h: float = 1e-6) -> JacobianCheck:
    """Compare the analytic Jacobian with central differences of the residual.

    Returns the largest entrywise deviation on the three bands and the largest
    finite-difference entry off them (which should be zero).
    """
    if not h > 0:
        raise ValueError("h must be positive")
    a = _check_alpha(alpha, model.support)
    s = model.support
    gaps = np.concatenate([[a[0] - s.lower], np.diff(a), [s.upper - a[-1]]])
    if np.min(gaps) <= 4 * h:
        raise ValueError("alpha needs ordering slack greater than 4h")
    n = a.size
    fd = np.empty((n, n))
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        fd[:, k] = (residual(model, a + step) - residual(model, a - step)) / (2 * h)
    analytic = jacobian(model, a).to_dense()
    band = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) <= 1
    deviation = float(np.max(np.abs(fd - analytic)[band]))
    offband = float(np.max(np.abs(fd[~band]))) if n > 2 else 0.0
    return JacobianCheck(deviation, offband)


def t_convergence_experiment(n: int, k_values, config: NewtonConfig | None = None) -> ConvergenceSeries:
    """Max distance between student-t(k) and standard normal principal points.

    Points are matched in sorted order.
    """
    ks = np.asarray([int(k) for k in k_values])
    if ks.size == 0 or np.any(ks < 3) or np.any(ks != np.asarray(k_values, dtype=float)):
        raise ValueError("every k must be an integer >= 3")
    if np.any(np.diff(ks) <= 0):
        raise ValueError("k_values must be strictly ascending")
    beta = newton_solve(catalog_make("normal"), n, config).points
    deviations = np.array([
        np.max(np.abs(newton_solve(catalog_make("student-t", {"k": int(k)}), n, config).points - beta))
        for k in ks
    ])
    return ConvergenceSeries(n=n, k_values=ks, deviations=deviations)


def iteration_study(model: DistributionModel, n_max: int = 100,
                    config: NewtonConfig | None = None) -> list[IterationRecord]:
    """Newton iterations needed for every ``n = 1..n_max``; failures are kept as records."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    records = []
    for n in range(1, n_max + 1):
        try:
            report = newton_solve(model, n, config)
        except ConvergenceError as exc:
            records.append(IterationRecord(n, None, float(exc.residual), type(exc).__name__))
        except ArithmeticError as exc:
            records.append(IterationRecord(n, None, math.nan, type(exc).__name__))
        else:
            records.append(IterationRecord(n, report.iterations, report.residual_inf_norm))
    return records
