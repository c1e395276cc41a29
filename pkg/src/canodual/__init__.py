"""Canonical dual analysis of one-center Gaussian RBF training."""

from .errors import (
    CanodualError,
    ConsistencyError,
    DomainError,
    PreconditionError,
    RegimeError,
    SingularityError,
)
from .kernel import GaussianKernel, RadialKernel
from .primal import ProblemParams, eval_P, grad_P, hess_P
from .solver import CaseReport, CriticalPoint, detect_case, find_dual_criticals, recommend_center, solve

__version__ = "0.1.0"

__all__ = [
    "CanodualError", "CaseReport", "ConsistencyError", "CriticalPoint", "DomainError",
    "GaussianKernel", "PreconditionError", "ProblemParams", "RadialKernel", "RegimeError",
    "SingularityError", "detect_case", "eval_P", "find_dual_criticals", "grad_P", "hess_P",
    "recommend_center", "solve",
]
