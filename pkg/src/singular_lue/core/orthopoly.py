"""Monic orthogonal polynomials for the deformed weight.

Recurrence coefficients are read off the upper Cholesky factor R of the moment
matrix (H = R^T R):

    alpha_j = R[j][j+1]/R[j][j] - R[j-1][j]/R[j-1][j-1]
    beta_j  = (R[j][j] / R[j-1][j-1])^2
    p1(n)   = -R[n-1][n] / R[n-1][n-1]
"""

from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import structlog

from singular_lue.core.errors import DomainError, IdentityViolation
from singular_lue.core.moments import (
    EnsembleParams,
    HankelData,
    MomentTable,
    build_moment_table,
    cholesky_hankel,
    hankel_data,
)
from singular_lue.core.precision import PrecisionContext, with_precision_escalation
from singular_lue.core.specialfun import barnes_g_ratio, laguerre_hankel_d0
from singular_lue.core.verification import VerificationReport, relative_residual

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class RecurrenceTable:
    """alpha_n, beta_n for n <= n_max and p1(n) for n <= n_max + 1.

    beta_n[0] is 0, matching beta_0 P_{-1} = 0.
    """

    params: EnsembleParams
    alpha_n: Tuple[Any, ...]
    beta_n: Tuple[Any, ...]
    p1: Tuple[Any, ...]
    hankel: HankelData
    moments: MomentTable

    @property
    def n_max(self) -> int:
        return len(self.alpha_n) - 1

    @property
    def h(self) -> Tuple[Any, ...]:
        return self.hankel.h


@dataclass(frozen=True)
class PolynomialValue:
    n: int
    z: Any
    value: Any
    derivative: Any
    second_derivative: Any


@with_precision_escalation
def recurrence_coeffs(n_max: int, params: EnsembleParams) -> RecurrenceTable:
    """Recurrence coefficients up to n_max from a size n_max + 2 Cholesky factor."""
    if n_max < 0:
        raise DomainError("n_max must be nonnegative", n_max=n_max)
    mp = params.mp
    size = n_max + 2
    moments = build_moment_table(2 * size - 2, params)
    data = cholesky_hankel(moments, size)
    R = data.R

    def ratio(j: int) -> Any:
        return R[j][j + 1] / R[j][j] if j >= 0 else mp.zero

    alpha_n = tuple(ratio(j) - ratio(j - 1) for j in range(n_max + 1))
    beta_n = (mp.zero,) + tuple((R[j][j] / R[j - 1][j - 1]) ** 2 for j in range(1, n_max + 1))
    p1 = tuple(-ratio(n - 1) for n in range(n_max + 2))

    tol = params.ctx.half_precision
    for j in range(1, n_max + 1):
        residual = relative_residual(beta_n[j], data.beta(j))
        if residual > tol:
            raise IdentityViolation("beta_n = D_{n+1}D_{n-1}/D_n^2", residual, tol)

    return RecurrenceTable(
        params=params,
        alpha_n=alpha_n,
        beta_n=beta_n,
        p1=p1,
        hankel=data,
        moments=moments,
    )


def poly_coefficients(n: int, table: RecurrenceTable) -> List[List[Any]]:
    """Ascending monomial coefficients of P_0 .. P_n."""
    if n > table.n_max + 1:
        raise DomainError("recurrence table too short", n=n, n_max=table.n_max)
    mp = table.params.mp
    polys: List[List[Any]] = [[mp.one]]
    previous: List[Any] = []
    for k in range(n):
        current = polys[-1]
        nxt = [mp.zero] * (k + 2)
        for i, c in enumerate(current):
            nxt[i + 1] += c
            nxt[i] -= table.alpha_n[k] * c
        for i, c in enumerate(previous):
            nxt[i] -= table.beta_n[k] * c
        previous = current
        polys.append(nxt)
    return polys


def eval_pn(
    n: int,
    z: Any,
    params: EnsembleParams,
    table: Optional[RecurrenceTable] = None,
) -> PolynomialValue:
    """P_n(z) with its first two z-derivatives from the differentiated recurrence."""
    if table is None:
        table = recurrence_coeffs(max(n - 1, 0), params)
    mp = table.params.mp
    z = mp.convert(z)
    p_prev, p = mp.zero, mp.one
    d_prev, d = mp.zero, mp.zero
    dd_prev, dd = mp.zero, mp.zero
    for k in range(n):
        shift = z - table.alpha_n[k]
        beta = table.beta_n[k]
        p_next = shift * p - beta * p_prev
        d_next = p + shift * d - beta * d_prev
        dd_next = 2 * d + shift * dd - beta * dd_prev
        p_prev, p = p, p_next
        d_prev, d = d, d_next
        dd_prev, dd = dd, dd_next
    return PolynomialValue(n=n, z=z, value=p, derivative=d, second_derivative=dd)


def gram_matrix(m_max: int, table: RecurrenceTable) -> List[List[Any]]:
    """(int P_i P_k w dy) for i, k <= m_max as bilinear forms in the moments."""
    polys = poly_coefficients(m_max, table)
    mp = table.params.mp
    mu = table.moments
    gram = []
    for ci in polys:
        row = []
        for ck in polys:
            row.append(
                mp.fsum(a * b * mu[i + k] for i, a in enumerate(ci) for k, b in enumerate(ck))
            )
        gram.append(row)
    return gram


def verify_orthogonality(m_max: int, table: RecurrenceTable, tol: Any = None) -> VerificationReport:
    params = table.params
    tol = params.ctx.half_precision if tol is None else tol
    gram = gram_matrix(m_max, table)
    report = VerificationReport(suite="orthogonality")
    mp = params.mp
    for i in range(m_max + 1):
        for k in range(i + 1):
            if i == k:
                report.check(
                    "norm", gram[i][i], table.h[i], tol, n=i, alpha=params.alpha_mp, s=params.s_mp
                )
            else:
                scale = mp.sqrt(table.h[i] * table.h[k])
                report.check(
                    "orthogonality",
                    gram[i][k],
                    0,
                    tol,
                    n=i,
                    alpha=params.alpha_mp,
                    s=params.s_mp,
                    scale=scale,
                    detail=f"m={k}",
                )
    return report


def pn_zero_ratio(n: int, params: EnsembleParams, tol: Any = None) -> Any:
    """(-1)^n P_n(0, s), checked against D_n[alpha+1] / D_n[alpha]."""
    mp = params.mp
    if n == 0:
        return mp.one
    tol = params.ctx.half_precision if tol is None else tol
    direct = (-1) ** n * eval_pn(n, 0, params).value
    shifted = hankel_data(n, params.with_alpha(params.alpha_mp + 1)).D[n]
    ratio = shifted / hankel_data(n, params).D[n]
    residual = relative_residual(direct, ratio)
    if residual > tol:
        raise IdentityViolation("(-1)^n P_n(0) = D_n[alpha+1]/D_n[alpha]", residual, tol)
    if params.is_laguerre:
        alpha = params.alpha_mp
        exact = mp.gamma(n + alpha + 1) / mp.gamma(alpha + 1)
        residual = relative_residual(direct, exact)
        if residual > tol:
            raise IdentityViolation("(-1)^n P_n(0,0) = Gamma(n+alpha+1)/Gamma(alpha+1)", residual, tol)
    return direct


def ode_residual(
    n: int,
    z: Any,
    table: RecurrenceTable,
    a_n: Any,
    b_n: Any,
    sum_a: Any,
) -> Any:
    """Relative residual of the second-order linear ODE satisfied by y = P_n.

    A_n = 1/z + a_n/z^2, B_n = -n/z + b_n/z^2 and v' = 1 - alpha/z - s/z^2.
    """
    params = table.params
    mp = params.mp
    z = mp.mpf(z)
    if z == 0:
        raise DomainError("the ladder ODE is singular at z = 0")
    alpha, s = params.alpha_mp, params.s_mp
    A = 1 / z + a_n / z**2
    A_prime = -1 / z**2 - 2 * a_n / z**3
    B = -n / z + b_n / z**2
    B_prime = n / z**2 - 2 * b_n / z**3
    v_prime = 1 - alpha / z - s / z**2
    sum_A = n / z + sum_a / z**2

    y = eval_pn(n, z, params, table)
    first = (v_prime + A_prime / A) * y.derivative
    zeroth = (B_prime - B * A_prime / A + sum_A) * y.value
    residual = y.second_derivative - first + zeroth
    scale = max(abs(y.second_derivative), abs(first), abs(zeroth))
    return abs(residual) / scale if scale else abs(residual)


def verify_laguerre(n_max: int, alpha: Any, ctx: PrecisionContext, tol: Any = None) -> VerificationReport:
    """Undeformed weight: Laguerre recurrence, D_n(0) in closed form and P_n(0)."""
    params = EnsembleParams(alpha=alpha, s=0, ctx=ctx)
    tol = ctx.default_tol() if tol is None else tol
    table = recurrence_coeffs(n_max, params)
    params = table.params
    mp = params.mp
    a = params.alpha_mp
    report = VerificationReport(suite="laguerre")
    for n in range(n_max + 1):
        point = dict(n=n, alpha=a, s=0)
        report.check("laguerre.alpha", table.alpha_n[n], 2 * n + 1 + a, tol, **point)
        if n >= 1:
            report.check("laguerre.beta", table.beta_n[n], n * (n + a), tol, **point)
        D = table.hankel.D[n]
        report.check("D_n(0)", D, laguerre_hankel_d0(n, a, params.ctx), tol, **point)
        report.check("barnes-g", D, barnes_g_ratio(n, a, params.ctx), tol, **point)
        value = (-1) ** n * eval_pn(n, 0, params, table).value
        exact = mp.gamma(n + a + 1) / mp.gamma(a + 1)
        report.check("P_n(0)", value, exact, tol, **point)
    return report
