"""Truncated-filter linear processes with tapered heavy-tailed innovations.

The package simulates partial-sum processes of moving averages whose filter
is truncated at a growing lag and whose innovations are (optionally tapered)
Pareto variables, evaluates the constants and kernels of the corresponding
Gaussian and alpha-stable limit processes analytically, and verifies the
predicted convergence at desk scale by Monte Carlo.
"""

from .errors import DomainError, NumericalError, SizeError, TaplinError, UsageError
from .filters import Dependence, FilterSpec, FilterTaper, TaperedFilter
from .innovations import (
    InnovationKind,
    InnovationSpec,
    TailIndex,
    TaperLevel,
    TaperRegime,
    classify_innovation_taper,
)
from .partial_sums import (
    CoefficientProfile,
    Normalizer,
    RegimeSpec,
    coefficient_profile,
    coupling_distance,
    exact_covariance,
    exact_variance,
    lyapunov_fraction,
    normalized_process,
    normalizer,
    simulate_partial_sum_path,
)
from .limit_laws import (
    GaussianLimit,
    StableLimit,
    TFKernel,
    constant_C,
    gaussian_covariance,
    limit_variance,
    limit_variance_prop3,
    simulate_gaussian_limit,
    simulate_tfsm3,
    stable_kernel,
    stable_log_cf,
    tf3_covariance,
)
from .streams import make_stream

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "TaplinError", "DomainError", "UsageError", "SizeError", "NumericalError",
    "TailIndex", "TaperLevel", "TaperRegime", "InnovationKind", "InnovationSpec",
    "classify_innovation_taper",
    "Dependence", "FilterTaper", "FilterSpec", "TaperedFilter",
    "RegimeSpec", "CoefficientProfile", "Normalizer",
    "coefficient_profile", "exact_variance", "exact_covariance", "normalizer",
    "simulate_partial_sum_path", "normalized_process", "lyapunov_fraction",
    "coupling_distance", "make_stream",
    "constant_C", "limit_variance", "limit_variance_prop3", "gaussian_covariance",
    "GaussianLimit", "StableLimit", "TFKernel", "stable_kernel", "stable_log_cf",
    "tf3_covariance", "simulate_gaussian_limit", "simulate_tfsm3",
]
