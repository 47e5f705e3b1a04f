"""MacDonald functions, log-gamma products and the Laguerre Hankel determinant.

K_nu(x) is evaluated from the integral representation

    K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt

by double-exponential (tanh-sinh) quadrature for two base orders in [0, 2),
then carried upward with K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu, the stable
direction for K.
"""

from typing import Any, List

import structlog

from singular_lue.core.errors import DomainError, QuadratureError
from singular_lue.core.precision import PrecisionContext

logger = structlog.get_logger(__name__)

# Extra bits of decay demanded of the truncated integrand tail.
_TAIL_GUARD_BITS = 24


def _check_argument(x: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    x = mp.mpf(x)
    if x <= 0:
        raise DomainError(f"K_nu(x) requires x > 0, got {x}", x=x)
    return x


def _truncation_point(nu: Any, x: Any, ctx: PrecisionContext) -> Any:
    """Smallest T with x(cosh T - 1) - nu T beyond the working precision."""
    mp = ctx.mp
    budget = (ctx.bits + _TAIL_GUARD_BITS) * mp.ln2
    t = mp.mpf(1)
    for _ in range(12):
        t = mp.acosh(1 + (budget + nu * t) / x)
    return t


def _bessel_k_quad(nu: Any, x: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp

    def integrand(t: Any) -> Any:
        return mp.exp(-x * (mp.cosh(t) - 1)) * mp.cosh(nu * t)

    upper = _truncation_point(nu, x, ctx)
    value, error = mp.quad(
        integrand,
        [0, upper],
        method="tanh-sinh",
        error=True,
        maxdegree=ctx.quad_max_degree,
    )
    if error > ctx.quad_tolerance * abs(value):
        logger.warning(
            "quadrature.failed",
            what="bessel_k",
            nu=mp.nstr(nu, 8),
            x=mp.nstr(x, 8),
            rel_error=mp.nstr(error / abs(value), 5),
        )
        raise QuadratureError(
            f"K_{mp.nstr(nu, 8)}({mp.nstr(x, 8)}) quadrature did not converge",
            nu=nu,
            x=x,
            error=error,
        )
    return mp.exp(-x) * value


def bessel_k_sequence(nu0: Any, count: int, x: Any, ctx: PrecisionContext) -> List[Any]:
    """Return [K_{nu0}(x), K_{nu0+1}(x), ..., K_{nu0+count-1}(x)].

    Only two quadratures are performed, at the fractional base orders
    nu0 - floor(nu0) and that plus one; all other orders come from the
    upward recurrence.
    """
    mp = ctx.mp
    x = _check_argument(x, ctx)
    nu0 = mp.mpf(nu0)
    if nu0 < 0:
        raise DomainError("bessel_k_sequence expects a nonnegative starting order", nu0=nu0)
    if count < 1:
        return []

    base = nu0 - mp.floor(nu0)
    offset = int(mp.floor(nu0))
    total = offset + count
    ladder = [_bessel_k_quad(base, x, ctx)]
    if total > 1:
        ladder.append(_bessel_k_quad(base + 1, x, ctx))
    for k in range(1, total - 1):
        order = base + k
        ladder.append(ladder[k - 1] + 2 * order / x * ladder[k])
    return ladder[offset:total]


def bessel_k(nu: Any, x: Any, ctx: PrecisionContext) -> Any:
    """K_nu(x) for real nu (normalised to |nu|) and x > 0."""
    mp = ctx.mp
    x = _check_argument(x, ctx)
    nu = abs(mp.mpf(nu))
    if nu < 2:
        return _bessel_k_quad(nu, x, ctx)
    return bessel_k_sequence(nu, 1, x, ctx)[0]


def bessel_k_halfint(p: int, x: Any, ctx: PrecisionContext) -> Any:
    """K_{p+1/2}(x) from its terminating finite sum."""
    if p < 0:
        raise DomainError("half-integer order index must be nonnegative", p=p)
    mp = ctx.mp
    x = _check_argument(x, ctx)
    total = mp.mpf(0)
    for k in range(p + 1):
        total += mp.factorial(p + k) / (
            mp.factorial(k) * mp.factorial(p - k) * (2 * x) ** k
        )
    return mp.sqrt(mp.pi / (2 * x)) * mp.exp(-x) * total


def log_hankel_d0(n: int, alpha: Any, ctx: PrecisionContext) -> Any:
    """ln D_n(0) = sum_{j<n} [ln j! + ln Gamma(alpha + 1 + j)]."""
    if n < 0:
        raise DomainError("determinant order must be nonnegative", n=n)
    mp = ctx.mp
    alpha = mp.mpf(alpha)
    if alpha <= 0:
        raise DomainError("alpha must be positive", alpha=alpha)
    return mp.fsum(mp.loggamma(j + 1) + mp.loggamma(alpha + 1 + j) for j in range(n))


def laguerre_hankel_d0(n: int, alpha: Any, ctx: PrecisionContext) -> Any:
    """D_n(0) = G(n+1) G(n+alpha+1) / G(alpha+1), unrolled into a gamma product."""
    return ctx.mp.exp(log_hankel_d0(n, alpha, ctx))


def barnes_g_ratio(n: int, alpha: Any, ctx: PrecisionContext) -> Any:
    """The Barnes-G form of D_n(0), evaluated directly."""
    mp = ctx.mp
    alpha = mp.mpf(alpha)
    return mp.barnesg(n + 1) * mp.barnesg(n + alpha + 1) / mp.barnesg(alpha + 1)
