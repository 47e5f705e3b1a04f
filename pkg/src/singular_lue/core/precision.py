"""Working-precision plumbing: per-computation mpmath contexts and escalation."""

from dataclasses import dataclass, replace
from functools import cached_property, wraps
from typing import Any, Callable, Optional, TypeVar

import mpmath
import structlog

from singular_lue.core.errors import ConditioningError, DomainError

logger = structlog.get_logger(__name__)

T = TypeVar("T")

MIN_BITS = 64


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision plus the quadrature target.

    Each instance owns a private ``mpmath.MPContext``. mpmath routines adjust
    the context precision while they run, so a context must never be shared
    between threads; build one per task instead.
    """

    bits: int = 256
    quad_tol: Optional[float] = None
    quad_max_degree: int = 10

    def __post_init__(self) -> None:
        if self.bits < MIN_BITS:
            raise DomainError(f"precision must be at least {MIN_BITS} bits", bits=self.bits)
        if self.quad_tol is not None and self.quad_tol <= 0:
            raise DomainError("quad_tol must be positive", quad_tol=self.quad_tol)

    @cached_property
    def mp(self) -> mpmath.MPContext:
        ctx = mpmath.MPContext()
        ctx.prec = self.bits
        return ctx

    @property
    def quad_tolerance(self) -> Any:
        if self.quad_tol is not None:
            return self.mp.mpf(self.quad_tol)
        return self.mp.ldexp(1, -(self.bits - 16))

    @property
    def half_precision(self) -> Any:
        """2^(-bits/2), the agreement level for two routes sharing inputs."""
        return self.mp.ldexp(1, -(self.bits // 2))

    def default_tol(self) -> Any:
        """Relative identity tolerance: 1e-15 at 256 bits, halving per extra 2 bits."""
        exponent = -(self.bits // 2) + 78
        return min(self.mp.ldexp(1, exponent), self.mp.mpf("1e-6"))

    def doubled(self) -> "PrecisionContext":
        return replace(self, bits=2 * self.bits, quad_tol=None)


def with_precision_escalation(func: Callable[..., T]) -> Callable[..., T]:
    """Retry once at twice the precision when a Hankel pivot loses too many bits.

    The wrapped callable must accept the ensemble parameters as ``params`` (keyword
    or last positional argument) exposing ``with_precision``.
    """

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        try:
            return func(*args, **kwargs)
        except ConditioningError as e:
            if "params" in kwargs:
                params = kwargs["params"]
                new_params = params.with_precision(params.ctx.doubled())
                kwargs["params"] = new_params
            else:
                params = args[-1]
                new_params = params.with_precision(params.ctx.doubled())
                args = (*args[:-1], new_params)
            logger.info(
                "precision.escalated",
                operation=func.__name__,
                old_bits=e.bits,
                new_bits=new_params.ctx.bits,
                lost_bits=round(float(e.lost_bits), 1),
            )
            return func(*args, **kwargs)

    return wrapper
