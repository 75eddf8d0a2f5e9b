"""Exception types shared by the lab modules."""
from typing import Any, Dict, Optional


class CompactonError(Exception):
    """Base class for every error raised by the lab"""


class DomainError(CompactonError, ValueError):
    """Parameters outside the admissible domain (p > 2, omega > 0, gamma > 0, ...)"""


class PreconditionError(CompactonError):
    """A documented precondition of an operation does not hold"""


class ConvergenceError(CompactonError):
    """A numerical procedure did not converge"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class QuadratureError(ConvergenceError):
    def __init__(self, message: str, estimate: float, error_estimate: float):
        super().__init__(message, {"estimate": estimate, "error_estimate": error_estimate})
        self.estimate = estimate
        self.error_estimate = error_estimate


class InconsistencyError(CompactonError):
    """Computed quantities contradict a structural fact (signals numerical breakdown)"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
