"""Probability functions of chance constraints and eventual-convexity certificates."""

from .concavity import (
    ConcavityReport,
    TransformG,
    check_concave_ginv,
    check_g_concavity,
    check_propagation,
    g_decreasing_tstar,
    generalized_mean,
)
from .copulas import Copula, copula_eval, separable_prob
from .distributions import Marginal
from .elliptical import (
    EllipticalLaw,
    direct_mc_probability,
    make_elliptical,
    probability,
    sphere_points,
)
from .rho import ConstraintOracle, QuadraticSpec, rho_bisect, rho_quadratic
from .thresholds import ThresholdReport

__version__ = "0.1.0"

__all__ = [
    "ConcavityReport",
    "ConstraintOracle",
    "Copula",
    "EllipticalLaw",
    "Marginal",
    "QuadraticSpec",
    "ThresholdReport",
    "TransformG",
    "check_concave_ginv",
    "check_g_concavity",
    "check_propagation",
    "copula_eval",
    "direct_mc_probability",
    "g_decreasing_tstar",
    "generalized_mean",
    "make_elliptical",
    "probability",
    "rho_bisect",
    "rho_quadratic",
    "separable_prob",
    "sphere_points",
]
