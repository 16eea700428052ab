"""Convexity radii for images of balls under quadratic maps."""
from .bounds import BoundsReport, compute_bounds, eps_max, eps_tilde_max, ijnr_check
from .errors import InvalidInputError, NumericalFailure, QConvexError
from .estimates import EstimateReport, eps_est, eps_est_preconditioned, eps_polyak, estimate_report
from .lipschitz import LipschitzReport, l_lower_bound, l_n, l_new, l_nov, l_polyak, lipschitz_report
from .model import QuadraticMapSpec, eval_map, from_dict, to_dict, validate_and_symmetrize
from .search import SearchOptions
from .secular import secular_min, support_point
from .verify import convexity_audit, sample_boundary

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "EstimateReport",
    "InvalidInputError",
    "LipschitzReport",
    "NumericalFailure",
    "QConvexError",
    "QuadraticMapSpec",
    "SearchOptions",
    "compute_bounds",
    "convexity_audit",
    "eps_est",
    "eps_est_preconditioned",
    "eps_max",
    "eps_polyak",
    "eps_tilde_max",
    "estimate_report",
    "eval_map",
    "from_dict",
    "ijnr_check",
    "l_lower_bound",
    "l_n",
    "l_new",
    "l_nov",
    "l_polyak",
    "lipschitz_report",
    "sample_boundary",
    "secular_min",
    "support_point",
    "to_dict",
    "validate_and_symmetrize",
    "__version__",
]
