"""Numerical free probability: free convolution, free entropy and free Fisher information."""
from .errors import FreeLabError
from .measure import Measure, make_atomic_measure, make_grid_measure, moment, moments, dilate, named
from .transforms import cauchy_transform, stieltjes_invert, hilbert_transform
from .free_conv import SubordinationConfig, free_add_convolve, semicircular_smooth, weighted_free_sum
from .entropy import (NEG_INFINITY, ChiValue, FlowQuadratureConfig, chi_log_energy, chi_via_fisher_flow,
                      conjugate_relation_residual, conjugate_variable, fisher_from_density)
from .inequalities import (CoefficientVector, InequalityReport, check_chi_superadditivity,
                           check_clt_monotonicity, check_entropy_power, check_fisher_inequality,
                           check_free_stam)

__version__ = "0.1.0"

__all__ = [
    "FreeLabError", "Measure", "make_atomic_measure", "make_grid_measure", "moment", "moments", "dilate", "named",
    "cauchy_transform", "stieltjes_invert", "hilbert_transform",
    "SubordinationConfig", "free_add_convolve", "semicircular_smooth", "weighted_free_sum",
    "NEG_INFINITY", "ChiValue", "FlowQuadratureConfig", "chi_log_energy", "chi_via_fisher_flow",
    "conjugate_relation_residual", "conjugate_variable", "fisher_from_density",
    "CoefficientVector", "InequalityReport", "check_chi_superadditivity", "check_clt_monotonicity",
    "check_entropy_power", "check_fisher_inequality", "check_free_stam",
]
