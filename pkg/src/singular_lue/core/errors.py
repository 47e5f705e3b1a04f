"""Exception hierarchy shared by every numerical module."""

from typing import Any, Dict, Optional


class SingularLUEError(Exception):
    """Base class for all toolkit errors"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context: Dict[str, Any] = context


class DomainError(SingularLUEError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class PrecisionError(SingularLUEError):
    """Working precision is insufficient for the requested accuracy"""


class ConditioningError(PrecisionError):
    """A Cholesky pivot of a Hankel matrix lost too many bits"""

    def __init__(self, message: str, lost_bits: float, bits: int, **context: Any):
        super().__init__(message, lost_bits=lost_bits, bits=bits, **context)
        self.lost_bits = lost_bits
        self.bits = bits


class QuadratureError(PrecisionError):
    """Quadrature failed to reach the target tolerance"""


class DegeneratePivotError(SingularLUEError):
    """The linear coefficient of a_n in the hierarchy step vanished"""

    def __init__(self, n: int, s: Any, pivot: Any):
        super().__init__(
            f"degenerate hierarchy pivot at n={n}, s={s}: {pivot}",
            n=n,
            s=s,
            pivot=pivot,
        )
        self.n = n
        self.s = s
        self.pivot = pivot


class SingularStateError(SingularLUEError):
    """Painleve state at a singular point (a = 0, s = 0) or orbit blow-up"""


class IdentityViolation(SingularLUEError):
    """An asserted identity failed beyond its tolerance"""

    def __init__(
        self,
        identity: str,
        residual: Any,
        tolerance: Any,
        message: Optional[str] = None,
    ):
        super().__init__(
            message or f"identity {identity} violated: residual {residual} > {tolerance}",
            identity=identity,
            residual=residual,
            tolerance=tolerance,
        )
        self.identity = identity
        self.residual = residual
        self.tolerance = tolerance


class ConfigurationError(SingularLUEError):
    """Invalid run configuration"""
