"""Moments of x^alpha e^{-x-s/x}, Hankel determinants and the moment generating function."""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, List, Optional, Sequence, Tuple

import structlog

from singular_lue.core.errors import ConditioningError, DomainError
from singular_lue.core.precision import PrecisionContext, with_precision_escalation
from singular_lue.core.specialfun import bessel_k, bessel_k_sequence, log_hankel_d0
from singular_lue.orchestration.sweep import run_sweep

logger = structlog.get_logger(__name__)

# Bits a Cholesky pivot may lose before the computation is declared ill-conditioned
# is bits - _PIVOT_RESERVE_BITS.
_PIVOT_RESERVE_BITS = 32


@dataclass(frozen=True)
class EnsembleParams:
    """(alpha, s) plus the working precision.

    alpha and s may be given as int, float, str or mpf; strings are parsed at
    the working precision so that decimal inputs such as "0.3" are exact to it.
    """

    alpha: Any
    s: Any
    ctx: PrecisionContext = field(default_factory=PrecisionContext)

    def __post_init__(self) -> None:
        if self.alpha_mp <= 0:
            raise DomainError("alpha must be positive", alpha=self.alpha)
        if self.s_mp < 0:
            raise DomainError("s must be nonnegative", s=self.s)

    @cached_property
    def alpha_mp(self) -> Any:
        return self.ctx.mp.mpf(self.alpha)

    @cached_property
    def s_mp(self) -> Any:
        return self.ctx.mp.mpf(self.s)

    @property
    def mp(self) -> Any:
        return self.ctx.mp

    @property
    def is_laguerre(self) -> bool:
        return self.s_mp == 0

    def with_precision(self, ctx: PrecisionContext) -> "EnsembleParams":
        return replace(self, ctx=ctx)

    def with_s(self, s: Any) -> "EnsembleParams":
        return EnsembleParams(alpha=self.alpha, s=s, ctx=self.ctx)

    def with_alpha(self, alpha: Any) -> "EnsembleParams":
        return EnsembleParams(alpha=alpha, s=self.s, ctx=self.ctx)


@dataclass(frozen=True)
class MomentTable:
    """mu_j(s) for j = -1, 0, ..., j_max. mu_{-1} is absent when s = 0."""

    params: EnsembleParams
    values: Tuple[Any, ...]

    @property
    def j_max(self) -> int:
        return len(self.values) - 2

    def __getitem__(self, j: int) -> Any:
        if j < -1 or j > self.j_max:
            raise IndexError(f"moment index {j} outside [-1, {self.j_max}]")
        value = self.values[j + 1]
        if value is None:
            raise DomainError("mu_{-1} diverges at s = 0", j=j)
        return value


@dataclass(frozen=True)
class HankelData:
    """Cholesky data of the n_max x n_max Hankel matrix (mu_{j+k}).

    ``R`` is the upper factor, H = R^T R; h_j = R[j][j]^2 and D_{j+1} = D_j h_j.
    """

    params: EnsembleParams
    D: Tuple[Any, ...]
    h: Tuple[Any, ...]
    R: Tuple[Tuple[Any, ...], ...]
    lost_bits: Tuple[float, ...]

    @property
    def n_max(self) -> int:
        return len(self.D) - 1

    def beta(self, n: int) -> Any:
        """beta_n = D_{n+1} D_{n-1} / D_n^2."""
        if n < 1:
            raise IndexError("beta_n is defined for n >= 1")
        return self.D[n + 1] * self.D[n - 1] / self.D[n] ** 2

    def log_D(self, n: int) -> Any:
        mp = self.params.mp
        return mp.fsum(mp.log(h) for h in self.h[:n])


def moment(j: int, params: EnsembleParams) -> Any:
    """mu_j(s) = int_0^inf x^{j+alpha} e^{-x-s/x} dx."""
    mp = params.mp
    if j < -1:
        raise DomainError("moments are defined for j >= -1", j=j)
    order = j + params.alpha_mp + 1
    if params.is_laguerre:
        if j == -1:
            raise DomainError("mu_{-1} diverges at s = 0", j=j)
        return mp.gamma(order)
    s = params.s_mp
    return 2 * s ** (order / 2) * bessel_k(order, 2 * mp.sqrt(s), params.ctx)


def build_moment_table(j_max: int, params: EnsembleParams) -> MomentTable:
    """All moments mu_{-1..j_max} from a single Bessel ladder."""
    mp = params.mp
    alpha = params.alpha_mp
    if params.is_laguerre:
        values: List[Optional[Any]] = [None]
        values.extend(mp.gamma(j + alpha + 1) for j in range(j_max + 1))
        return MomentTable(params=params, values=tuple(values))

    s = params.s_mp
    ladder = bessel_k_sequence(alpha, j_max + 2, 2 * mp.sqrt(s), params.ctx)
    values = [2 * s ** ((alpha + k) / 2) * kv for k, kv in enumerate(ladder)]
    return MomentTable(params=params, values=tuple(values))


def cholesky_hankel(table: MomentTable, size: int) -> HankelData:
    """Cholesky factorisation of (mu_{j+k})_{j,k<size}, tracking pivot loss."""
    params = table.params
    mp = params.mp
    limit = params.ctx.bits - _PIVOT_RESERVE_BITS
    R: List[List[Any]] = [[mp.zero] * size for _ in range(size)]
    D = [mp.one]
    h: List[Any] = []
    lost: List[float] = []
    for i in range(size):
        for k in range(i, size):
            acc = table[i + k] - mp.fsum(R[m][i] * R[m][k] for m in range(i))
            if k == i:
                diagonal = table[2 * i]
                if acc <= 0:
                    raise ConditioningError(
                        f"Hankel pivot {i} is not positive",
                        lost_bits=float("inf"),
                        bits=params.ctx.bits,
                        pivot=i,
                    )
                lost_bits = float(mp.log(diagonal / acc, 2))
                if lost_bits > limit:
                    raise ConditioningError(
                        f"Hankel pivot {i} lost {lost_bits:.1f} bits",
                        lost_bits=lost_bits,
                        bits=params.ctx.bits,
                        pivot=i,
                    )
                lost.append(lost_bits)
                R[i][i] = mp.sqrt(acc)
                h.append(acc)
                D.append(D[-1] * acc)
            else:
                R[i][k] = acc / R[i][i]
    return HankelData(
        params=params,
        D=tuple(D),
        h=tuple(h),
        R=tuple(tuple(row) for row in R),
        lost_bits=tuple(lost),
    )


def _factor_hankel(n_max: int, params: EnsembleParams) -> HankelData:
    if n_max < 0:
        raise DomainError("determinant order must be nonnegative", n_max=n_max)
    table = build_moment_table(max(2 * n_max - 2, 0), params)
    data = cholesky_hankel(table, n_max)
    logger.debug(
        "hankel.factored",
        n_max=n_max,
        bits=params.ctx.bits,
        worst_loss=round(max(data.lost_bits, default=0.0), 1),
    )
    return data


@with_precision_escalation
def hankel_data(n_max: int, params: EnsembleParams) -> HankelData:
    """D_0..D_{n_max} and h_0..h_{n_max-1} for the deformed weight."""
    return _factor_hankel(n_max, params)


def hankel_det(n: int, params: EnsembleParams) -> Any:
    """D_n(s) = det(mu_{j+k})_{j,k<n}; D_0 = 1."""
    return hankel_data(n, params).D[n]


@with_precision_escalation
def mgf(n: int, params: EnsembleParams) -> Any:
    """M_f(s) = D_n(s) / D_n(0) for f(x) = 1/x."""
    if n < 1:
        raise DomainError("the moment generating function needs n >= 1", n=n)
    if params.is_laguerre:
        return params.mp.one
    data = _factor_hankel(n, params)
    ctx = data.params.ctx
    return ctx.mp.exp(data.log_D(n) - log_hankel_d0(n, params.alpha, ctx))


@dataclass(frozen=True)
class MGFCurve:
    n: int
    s_grid: Tuple[Any, ...]
    values: Tuple[Any, ...]

    @property
    def monotone_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.values, self.values[1:]))


def mgf_curve(
    n: int,
    s_grid: Sequence[Any],
    params: EnsembleParams,
    max_workers: Optional[int] = 1,
) -> MGFCurve:
    """M_f on an increasing s grid; the alpha and precision come from ``params``.

    Each point gets its own copy of the precision context. The first failed
    point re-raises its error.
    """

    def point(s: Any) -> Any:
        return mgf(n, replace(params, ctx=replace(params.ctx)).with_s(s))

    outcomes = run_sweep(list(s_grid), point, max_workers)
    for outcome in outcomes:
        if outcome.error is not None:
            raise outcome.error
    values = tuple(o.result for o in outcomes)
    return MGFCurve(n=n, s_grid=tuple(s_grid), values=values)
