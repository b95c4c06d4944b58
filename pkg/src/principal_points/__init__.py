"""Principal points of univariate distributions.

Newton's method on the self-consistency equations, with closed-form interval
moments for the catalog families and adaptive Gauss-Kronrod quadrature for
everything else.

>>> from principal_points import catalog_make, newton_solve
>>> report = newton_solve(catalog_make("normal"), 2)
>>> round(report.points[1], 6)
0.797885
"""
from ._backend import BACKEND
from .distributions import (
    CATALOG,
    TABULATED,
    AffineMap,
    DistributionModel,
    SupportInterval,
    affine_model,
    affine_pushforward,
    catalog_make,
    custom_model,
    family_defaults,
    mean,
    partial_expectation,
    partial_second_moment_about,
    probability_mass,
    variance,
)
from .errors import (
    ConvergenceError,
    OrderingError,
    ParameterError,
    PrincipalPointsError,
    QuadratureError,
    SingularMatrixError,
    UnknownDistributionError,
    ZeroMassCellError,
)
from .solver import (
    NewtonConfig,
    SolverReport,
    TridiagonalMatrix,
    distortion,
    initial_guess,
    jacobian,
    midpoints,
    newton_solve,
    residual,
    tridiag_solve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CATALOG",
    "TABULATED",
    "AffineMap",
    "DistributionModel",
    "SupportInterval",
    "affine_model",
    "affine_pushforward",
    "catalog_make",
    "custom_model",
    "family_defaults",
    "mean",
    "partial_expectation",
    "partial_second_moment_about",
    "probability_mass",
    "variance",
    "ConvergenceError",
    "OrderingError",
    "ParameterError",
    "PrincipalPointsError",
    "QuadratureError",
    "SingularMatrixError",
    "UnknownDistributionError",
    "ZeroMassCellError",
    "NewtonConfig",
    "SolverReport",
    "TridiagonalMatrix",
    "distortion",
    "initial_guess",
    "jacobian",
    "midpoints",
    "newton_solve",
    "residual",
    "tridiag_solve",
]
