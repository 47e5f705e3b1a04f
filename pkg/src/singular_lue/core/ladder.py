"""Auxiliary quantities a_n, b_n of the ladder operators and the residue identities.

A_n(z) = 1/z + a_n/z^2 and B_n(z) = -n/z + b_n/z^2, with

    a_n = (s/h_n)     int P_n^2     w(y)/y dy
    b_n = (s/h_{n-1}) int P_n P_{n-1} w(y)/y dy
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

import structlog

from singular_lue.core.errors import DegeneratePivotError, DomainError
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.orthopoly import RecurrenceTable, poly_coefficients, recurrence_coeffs
from singular_lue.core.specialfun import bessel_k_sequence
from singular_lue.core.verification import VerificationReport

logger = structlog.get_logger(__name__)

DEFAULT_Z_SAMPLES = ("0.7", "2.3", "-1.1")


class AuxRoute(Enum):
    MOMENTS = "moments"
    HIERARCHY = "hierarchy"
    TODA_ODE = "toda-ode"


@dataclass(frozen=True)
class AuxTable:
    """a_0..a_{n_max} and b_0..b_{n_max} (b_0 = 0) from one route."""

    params: EnsembleParams
    a: Tuple[Any, ...]
    b: Tuple[Any, ...]
    route: AuxRoute
    recurrence: Optional[RecurrenceTable] = None

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def alpha_n(self, n: int) -> Any:
        return 2 * n + 1 + self.params.alpha_mp + self.a[n]

    def sum_a(self, n: int) -> Any:
        return self.params.mp.fsum(self.a[:n])

    def H(self, n: int) -> Any:
        """H_n = s d/ds ln D_n = -sum_{j<n} a_j."""
        return -self.sum_a(n)

    def beta_n(self, n: int) -> Any:
        """beta_n from a_n, b_n alone: beta a^2 = [ns - (2n+alpha)b]a - (b^2 - sb)."""
        if n == 0:
            return self.params.mp.zero
        s, alpha = self.params.s_mp, self.params.alpha_mp
        a, b = self.a[n], self.b[n]
        return ((n * s - (2 * n + alpha) * b) * a - (b * b - s * b)) / a**2


@dataclass(frozen=True)
class LadderCoefficients:
    """Exact partial-fraction data: A_n = A[0]/z + A[1]/z^2, etc."""

    n: int
    A: Tuple[Any, Any]
    B: Tuple[Any, Any]
    v_prime: Tuple[Any, Any, Any]

    def eval_A(self, z: Any) -> Any:
        return self.A[0] / z + self.A[1] / z**2

    def eval_B(self, z: Any) -> Any:
        return self.B[0] / z + self.B[1] / z**2

    def eval_v_prime(self, z: Any) -> Any:
        return self.v_prime[0] + self.v_prime[1] / z + self.v_prime[2] / z**2


def _scale(*terms: Any) -> Any:
    return max(abs(t) for t in terms)


def aux_from_moments(n_max: int, params: EnsembleParams) -> AuxTable:
    """a_n, b_n as bilinear forms of the polynomial coefficients in mu_{-1}..mu_{2n-1}."""
    table = recurrence_coeffs(n_max, params)
    params = table.params
    mp = params.mp
    if params.is_laguerre:
        zeros = (mp.zero,) * (n_max + 1)
        return AuxTable(params, zeros, zeros, AuxRoute.MOMENTS, table)

    s = params.s_mp
    mu = table.moments
    polys = poly_coefficients(n_max, table)

    def inverse_moment(ci: List[Any], ck: List[Any]) -> Any:
        return mp.fsum(x * y * mu[i + k - 1] for i, x in enumerate(ci) for k, y in enumerate(ck))

    a = tuple(s / table.h[n] * inverse_moment(polys[n], polys[n]) for n in range(n_max + 1))
    b = (mp.zero,) + tuple(
        s / table.h[n - 1] * inverse_moment(polys[n], polys[n - 1]) for n in range(1, n_max + 1)
    )
    return AuxTable(params, a, b, AuxRoute.MOMENTS, table)


def initial_a0(params: EnsembleParams) -> Any:
    """a_0 = sqrt(s) K_alpha(2 sqrt(s)) / K_{alpha+1}(2 sqrt(s))."""
    mp = params.mp
    if params.is_laguerre:
        return mp.zero
    root = mp.sqrt(params.s_mp)
    k_alpha, k_alpha1 = bessel_k_sequence(params.alpha_mp, 2, 2 * root, params.ctx)
    return root * k_alpha / k_alpha1


def hierarchy_step(n: int, a_n: Any, b_n: Any, params: EnsembleParams) -> Tuple[Any, Any]:
    """(a_{n+1}, b_{n+1}) from (a_n, b_n).

    b_{n+1} = s - (2n+1+alpha+a_n) a_n - b_n, then
    (b^2 - sb)(a_{n+1} + a_n) = [(n+1)s - (2n+2+alpha) b] a_{n+1} a_n is solved
    as a linear equation in a_{n+1}.
    """
    s, alpha = params.s_mp, params.alpha_mp
    b = s - (2 * n + 1 + alpha + a_n) * a_n - b_n
    quad = b * b - s * b
    c = (n + 1) * s - (2 * n + 2 + alpha) * b
    pivot = c * a_n - quad
    if abs(pivot) <= params.ctx.half_precision * _scale(c * a_n, quad):
        logger.warning("hierarchy.degenerate_pivot", n=n + 1, s=params.mp.nstr(s, 10))
        raise DegeneratePivotError(n + 1, s, pivot)
    return quad * a_n / pivot, b


def hierarchy_iterate(n_max: int, params: EnsembleParams) -> AuxTable:
    """Forward iteration of the MacDonald hierarchy from a_0 and b_0 = 0."""
    if params.is_laguerre:
        raise DomainError("the hierarchy starts from Bessel data and needs s > 0")
    a: List[Any] = [initial_a0(params)]
    b: List[Any] = [params.mp.zero]
    for n in range(n_max):
        a_next, b_next = hierarchy_step(n, a[n], b[n], params)
        a.append(a_next)
        b.append(b_next)
    return AuxTable(params, tuple(a), tuple(b), AuxRoute.HIERARCHY)


def ladder_coefficients(n: int, aux: AuxTable) -> LadderCoefficients:
    p = aux.params
    return LadderCoefficients(
        n=n,
        A=(p.mp.one, aux.a[n]),
        B=(p.mp.mpf(-n), aux.b[n]),
        v_prime=(p.mp.one, -p.alpha_mp, -p.s_mp),
    )


def verify_compatibility_conditions(
    n: int,
    aux: AuxTable,
    tol: Any,
    z_samples: Sequence[Any] = DEFAULT_Z_SAMPLES,
    report: Optional[VerificationReport] = None,
) -> VerificationReport:
    """(S1), (S2) and (S2') as rational identities in z at the sample points.

    Needs aux up to n + 1 and n >= 0 (A_{-1} = 0).
    """
    report = report or VerificationReport(suite="compatibility")
    params = aux.params
    mp = params.mp
    ln = ladder_coefficients(n, aux)
    ln1 = ladder_coefficients(n + 1, aux)
    lnm = ladder_coefficients(n - 1, aux) if n >= 1 else None
    alpha_n = aux.alpha_n(n)
    beta_n = aux.beta_n(n)
    beta_n1 = aux.beta_n(n + 1)
    point = dict(n=n, alpha=params.alpha_mp, s=params.s_mp)

    for raw in z_samples:
        z = mp.convert(raw)
        A_n, A_n1 = ln.eval_A(z), ln1.eval_A(z)
        A_nm = lnm.eval_A(z) if lnm is not None else mp.zero
        B_n, B_n1 = ln.eval_B(z), ln1.eval_B(z)
        vp = ln.eval_v_prime(z)
        sum_A = mp.fsum(ladder_coefficients(j, aux).eval_A(z) for j in range(n))
        detail = f"z={mp.nstr(z, 6)}"

        lhs, rhs = B_n1 + B_n, (z - alpha_n) * A_n - vp
        report.check("S1", lhs, rhs, tol, scale=_scale(B_n1, B_n, rhs, vp), detail=detail, **point)

        lhs = 1 + (z - alpha_n) * (B_n1 - B_n)
        rhs = beta_n1 * A_n1 - beta_n * A_nm
        report.check("S2", lhs, rhs, tol, scale=_scale(1, lhs, beta_n1 * A_n1), detail=detail, **point)

        lhs = B_n**2 + vp * B_n + sum_A
        rhs = beta_n * A_n * A_nm
        report.check(
            "S2'", lhs, rhs, tol, scale=_scale(B_n**2, vp * B_n, sum_A, rhs), detail=detail, **point
        )
    return report


def verify_residue_identities(
    n_max: int,
    params: EnsembleParams,
    tol: Any = None,
    z_samples: Sequence[Any] = DEFAULT_Z_SAMPLES,
) -> VerificationReport:
    """Residue identities, the two closed-form lemmas and moments/hierarchy agreement."""
    tol = params.ctx.default_tol() if tol is None else tol
    aux = aux_from_moments(n_max + 1, params)
    table = aux.recurrence
    assert table is not None
    params = aux.params
    s, alpha = params.s_mp, params.alpha_mp
    report = VerificationReport(suite="residue")

    hierarchy = None if params.is_laguerre else hierarchy_iterate(n_max + 1, params)

    for n in range(n_max + 1):
        a, b = aux.a, aux.b
        point = dict(n=n, alpha=alpha, s=s)
        alpha_n, beta_n = table.alpha_n[n], table.beta_n[n]
        quad = b[n] ** 2 - s * b[n]
        lin = n * s - (2 * n + alpha) * b[n]

        report.check("2.9", alpha_n, 2 * n + 1 + alpha + a[n], tol, **point)
        rhs = s - alpha_n * a[n]
        report.check("2.10", b[n + 1] + b[n], rhs, tol, scale=_scale(b[n + 1], b[n], s, rhs), **point)
        rhs = n * (n + alpha) + b[n] + aux.sum_a(n)
        report.check("2.11", beta_n, rhs, tol, scale=_scale(beta_n, n * (n + alpha), b[n]), **point)

        if n >= 1:
            report.check(
                "2.12", beta_n * (a[n] + a[n - 1]), lin, tol, scale=_scale(n * s, lin), **point
            )
            report.check("2.13", quad, beta_n * a[n] * a[n - 1], tol, **point)

        if params.is_laguerre:
            report.check("laguerre.alpha", alpha_n, 2 * n + 1 + alpha, tol, **point)
            report.check("laguerre.beta", beta_n, n * (n + alpha), tol, **point)
            continue

        lhs, rhs = beta_n * a[n] ** 2, lin * a[n] - quad
        report.check("2.14", lhs, rhs, tol, scale=_scale(lhs, lin * a[n], quad), **point)
        rhs = -n * (n + alpha) - b[n] + lin / a[n] - quad / a[n] ** 2
        report.check(
            "2.15", aux.sum_a(n), rhs, tol, scale=_scale(n * (n + alpha), lin / a[n], rhs), **point
        )
        report.record(
            "positivity.a", 0 if a[n] > 0 else 1, 0, detail="a_n > 0", **point
        )

        assert hierarchy is not None
        report.check("route.a", hierarchy.a[n], a[n], tol, **point)
        if n >= 1:
            report.check("route.b", hierarchy.b[n], b[n], tol, **point)

        verify_compatibility_conditions(n, aux, tol, z_samples, report)

    return report
