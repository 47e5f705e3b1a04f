"""Lax triple in z, s and n built from (h_n, a_n, b_n), and its compatibility checks.

Every matrix is stored conjugated by diag(1, 2 pi i), so all entries are real
for real s:

    A(z) = -sigma_3/2 + A1/z + A2/z^2
    B(z) = -A2/(s z)
    U(z) = z E11 + U0

with
    A1 = [[n + alpha/2, -h_n], [1/h_{n-1}, -n - alpha/2]]
    A2 = [[s/2 - b_n, -h_n a_n], [b_n (b_n - s)/(h_n a_n), b_n - s/2]]
    U0 = [[-alpha_n, h_n], [-1/h_n, 0]]

and 1/h_{-1} = 0.
"""

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import structlog

from singular_lue.core.errors import DomainError
from singular_lue.core.ladder import AuxTable, aux_from_moments
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.orthopoly import eval_pn
from singular_lue.core.toda import Derivative, build_stencil, fd_check, riccati_rhs
from singular_lue.core.verification import VerificationReport

logger = structlog.get_logger(__name__)

LAX_Z_SAMPLES = ("0.7", "2.3", "-1.1", complex(0.5, 1.0))
GAUGES = (1, 10)


@dataclass(frozen=True)
class LaxData:
    n: int
    s: Any
    A1: Any
    A2: Any
    U0: Any
    h_n: Any
    inv_h_nm1: Any
    a_n: Any
    b_n: Any
    alpha_n: Any
    beta_n: Any

    def A(self, z: Any, mp: Any) -> Any:
        sigma3 = mp.matrix([[1, 0], [0, -1]])
        return sigma3 * mp.mpf(-0.5) + self.A1 * (1 / z) + self.A2 * (1 / z**2)

    def B(self, z: Any, mp: Any) -> Any:
        return self.A2 * (-1 / (self.s * z))

    def U(self, z: Any, mp: Any) -> Any:
        return mp.matrix([[z, 0], [0, 0]]) + self.U0


@dataclass(frozen=True)
class JMParams:
    """Jimbo-Miwa variables; w is undefined at n = 0 where b_0 = 0."""

    n: int
    t: Any
    u: Any
    v: Any
    zeta: Any
    w: Optional[Any]
    theta_inf: Any
    theta_0: Any


def _lax_from_aux(n: int, aux: AuxTable) -> LaxData:
    table = aux.recurrence
    assert table is not None
    params = aux.params
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    h_n = table.h[n]
    inv_h_nm1 = 1 / table.h[n - 1] if n >= 1 else mp.zero
    a, b = aux.a[n], aux.b[n]
    half = alpha / 2
    A1 = mp.matrix([[n + half, -h_n], [inv_h_nm1, -n - half]])
    A2 = mp.matrix([[s / 2 - b, -h_n * a], [b * (b - s) / (h_n * a), b - s / 2]])
    U0 = mp.matrix([[-table.alpha_n[n], h_n], [-1 / h_n, 0]])
    return LaxData(
        n=n,
        s=s,
        A1=A1,
        A2=A2,
        U0=U0,
        h_n=h_n,
        inv_h_nm1=inv_h_nm1,
        a_n=a,
        b_n=b,
        alpha_n=table.alpha_n[n],
        beta_n=table.beta_n[n],
    )


def build_lax(n: int, s: Any, params: EnsembleParams, aux: Optional[AuxTable] = None) -> LaxData:
    params = params.with_s(s)
    if params.is_laguerre:
        raise DomainError("the Lax triple needs s > 0")
    aux = aux if aux is not None else aux_from_moments(n + 1, params)
    return _lax_from_aux(n, aux)


def _gauge(M: Any, c: Any, mp: Any) -> Any:
    """diag(1, c)^-1 M diag(1, c)."""
    return mp.matrix([[M[0, 0], M[0, 1] * c], [M[1, 0] / c, M[1, 1]]])


def _max_entry(M: Any) -> Any:
    return max(abs(M[i, j]) for i in range(M.rows) for j in range(M.cols))


def _relative(residual: Any, *terms: Any) -> Any:
    scale = max(_max_entry(T) for T in terms)
    value = _max_entry(residual)
    return value / scale if scale else value


def _derivatives(n: int, lax: LaxData, aux: AuxTable) -> tuple:
    """Closed-form s-derivatives of A1, A2 and U0 from the Riccati pair and s h_n' = -h_n a_n."""
    params = aux.params
    mp = params.mp
    s = params.s_mp
    a, b, h = lax.a_n, lax.b_n, lax.h_n
    sa, sb = riccati_rhs(n, a, b, params)
    a1, b1 = sa / s, sb / s
    ha = h * a
    ha1 = h * (a1 - a * a / s)

    d_inv_h_nm1 = aux.a[n - 1] * lax.inv_h_nm1 / s if n >= 1 else mp.zero
    dA1 = mp.matrix([[0, h * a / s], [d_inv_h_nm1, 0]])
    lower = ((2 * b - s) * b1 - b) / ha - b * (b - s) * ha1 / ha**2
    dA2 = mp.matrix([[mp.mpf(0.5) - b1, -ha1], [lower, b1 - mp.mpf(0.5)]])
    dU0 = mp.matrix([[-a1, -h * a / s], [-a / (s * h), 0]])
    return dA1, dA2, dU0


@dataclass(frozen=True)
class CompatibilityResiduals:
    """Largest relative entry residuals over the z samples."""

    zero_curvature: float
    s_shift: float
    z_shift: float

    def max(self) -> float:
        return max(self.zero_curvature, self.s_shift, self.z_shift)


def compatibility_residuals(
    n: int,
    s: Any,
    params: EnsembleParams,
    z_samples: Sequence[Any] = LAX_Z_SAMPLES,
    gauge: Any = 1,
    aux: Optional[AuxTable] = None,
) -> CompatibilityResiduals:
    """A_s - B_z - [B, A], U_s - B(n+1) U + U B(n) and U_z - A(n+1) U + U A(n)."""
    params = params.with_s(s)
    aux = aux if aux is not None else aux_from_moments(n + 1, params)
    params = aux.params
    mp = params.mp
    s = params.s_mp
    cur = _lax_from_aux(n, aux)
    nxt = _lax_from_aux(n + 1, aux)
    dA1, dA2, dU0 = _derivatives(n, cur, aux)
    c = mp.convert(gauge)

    def g(M: Any) -> Any:
        return _gauge(M, c, mp)

    e11 = mp.matrix([[1, 0], [0, 0]])
    worst = [mp.zero, mp.zero, mp.zero]
    for raw in z_samples:
        z = mp.convert(raw)
        A, B, U = g(cur.A(z, mp)), g(cur.B(z, mp)), g(cur.U(z, mp))
        A_next, B_next = g(nxt.A(z, mp)), g(nxt.B(z, mp))
        dA = g(dA1 * (1 / z) + dA2 * (1 / z**2))
        dB_dz = g(cur.A2 * (1 / (s * z**2)))
        bracket = B * A - A * B
        r1 = _relative(dA - dB_dz - bracket, dA, dB_dz, B * A, A * B)
        r2 = _relative(g(dU0) - B_next * U + U * B, g(dU0), B_next * U, U * B)
        r3 = _relative(g(e11) - A_next * U + U * A, g(e11), A_next * U, U * A)
        worst = [max(w, r) for w, r in zip(worst, (r1, r2, r3))]
    return CompatibilityResiduals(*(float(w) for w in worst))


def gauge_discrepancy(results: Sequence[CompatibilityResiduals]) -> float:
    """Largest spread of each residual across gauges; conjugation by diag(1, c) preserves them."""
    spreads = []
    for name in ("zero_curvature", "s_shift", "z_shift"):
        values = [getattr(r, name) for r in results]
        spreads.append(max(values) - min(values))
    return max(spreads, default=0.0)


def _jm_from_aux(n: int, aux: AuxTable) -> JMParams:
    table = aux.recurrence
    assert table is not None
    params = aux.params
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    t = mp.sqrt(s)
    power = t ** (-(2 * n + alpha))
    h_n = table.h[n]
    a, b = aux.a[n], aux.b[n]
    u = -h_n * power
    v = 1 / (power * table.h[n - 1]) if n >= 1 else mp.zero
    w = -power * h_n * a / b if n >= 1 else None
    return JMParams(
        n=n,
        t=t,
        u=u,
        v=v,
        zeta=-b / t,
        w=w,
        theta_inf=-alpha - 2 * n,
        theta_0=alpha,
    )


def jm_params(n: int, s: Any, params: EnsembleParams) -> JMParams:
    params = params.with_s(s)
    if params.is_laguerre:
        raise DomainError("the Jimbo-Miwa variables need s > 0")
    return _jm_from_aux(n, aux_from_moments(n, params))


def first_integral_theta0(jm: JMParams) -> Any:
    """theta_0 recovered from (u, v, zeta, w) by the first integral of the t-flow."""
    if jm.w is None:
        raise DomainError("the first integral needs n >= 1")
    t, u, v, zeta, w = jm.t, jm.u, jm.v, jm.zeta, jm.w
    return -(jm.theta_inf / t) * (2 * zeta + t) + 2 * u * (zeta + t) / (t * w) - (2 * zeta / t) * w * v


def jm_scalar_system(
    n: int,
    s: Any,
    params: EnsembleParams,
    tol: Any = None,
    divisor: int = 5,
) -> VerificationReport:
    """Scalar s-flow for (h_n, h_{n-1}, b_n, a_n), the theta_0 first integral and the t-flows."""
    params = params.with_s(s)
    tol = params.ctx.default_tol() if tol is None else tol
    stencil = build_stencil(params, lambda p: aux_from_moments(n, p), divisor)
    aux: AuxTable = stencil.center
    table = aux.recurrence
    assert table is not None
    mp = params.mp
    s_mp, alpha = params.s_mp, params.alpha_mp
    a, b, h = aux.a[n], aux.b[n], table.h[n]
    point = dict(n=n, alpha=alpha, s=s_mp)
    report = VerificationReport(suite="lax")

    def rec(t: AuxTable) -> Any:
        assert t.recurrence is not None
        return t.recurrence

    fd_check(report, "5.45", stencil.s_derivative(lambda t: rec(t).h[n]), -h * a, tol, **point)
    sa, _ = riccati_rhs(n, a, b, params)
    fd_check(report, "5.48", stencil.s_derivative(lambda t: t.a[n]), sa, tol, **point)

    jm = _jm_from_aux(n, aux)
    report.check("uv", jm.u * jm.v, -table.beta_n[n], tol, scale=max(abs(table.beta_n[n]), 1), **point)
    if n == 0:
        return report

    h_prev = table.h[n - 1]
    rhs = h_prev**2 / h * (b / a) * (s_mp - b)
    fd_check(report, "5.46", stencil.s_derivative(lambda t: rec(t).h[n - 1]), rhs, tol, **point)
    rhs = b - (b / a) * (s_mp - b) - (h / h_prev) * a
    fd_check(report, "5.47", stencil.s_derivative(lambda t: t.b[n]), rhs, tol, **point)

    report.check("5.40", first_integral_theta0(jm), alpha, tol, **point)
    assert jm.w is not None
    report.check("y=t/a", -jm.u / (jm.zeta * jm.w), jm.t / a, tol, **point)

    # t d/dt = 2 s d/ds
    def flow(getter: Any) -> Any:
        d = stencil.s_derivative(lambda t: getter(_jm_from_aux(n, t)))
        return Derivative(2 * d.estimate, 2 * d.bound)

    t, u, v, zeta, w, th = jm.t, jm.u, jm.v, jm.zeta, jm.w, jm.theta_inf
    fd_check(report, "flow.u", flow(lambda j: j.u), th * u + 2 * t * zeta * w, tol, **point)
    fd_check(report, "flow.v", flow(lambda j: j.v), -th * v + 2 * t / w * (zeta + t), tol, **point)
    rhs = 2 * zeta * w * v + zeta + 2 * u * (zeta + t) / w
    fd_check(report, "flow.zeta", flow(lambda j: j.zeta), rhs, tol, **point)
    rhs = 2 * u / w - 2 * w * v - th
    fd_check(report, "flow.ln_w", flow(lambda j: mp.log(abs(j.w))), rhs, tol, **point)
    return report


def s_ladder_check(
    n: int,
    z_samples: Sequence[Any],
    s: Any,
    params: EnsembleParams,
    tol: Any = None,
    divisor: int = 5,
) -> VerificationReport:
    """Raising and lowering operators in s at fixed z, with finite-difference s-derivatives."""
    if n < 1:
        raise DomainError("the s-ladder needs n >= 1", n=n)
    params = params.with_s(s)
    tol = params.ctx.default_tol() if tol is None else tol
    stencil = build_stencil(params, lambda p: aux_from_moments(n, p), divisor)
    aux: AuxTable = stencil.center
    table = aux.recurrence
    assert table is not None
    mp = params.mp
    alpha = params.alpha_mp
    a, b = aux.a, aux.b
    beta = table.beta_n[n]
    report = VerificationReport(suite="lax")
    point = dict(n=n, alpha=alpha, s=params.s_mp)

    def pn(k: int, z: Any, t: AuxTable) -> Any:
        return eval_pn(k, z, t.params, t.recurrence).value

    p_n0, p_nm0 = pn(n, 0, aux), pn(n - 1, 0, aux)
    report.check("5.53@z=0", -b[n] * p_n0, -beta * a[n] * p_nm0, tol, **point)

    for raw in z_samples:
        z = mp.convert(raw)
        detail = f"z={mp.nstr(z, 6)}"
        P_n, P_nm = pn(n, z, aux), pn(n - 1, z, aux)
        d_n = stencil.s_derivative(lambda t: pn(n, z, t))
        d_nm = stencil.s_derivative(lambda t: pn(n - 1, z, t))

        lhs = z * d_n.estimate - b[n] * P_n
        rhs = -beta * a[n] * P_nm
        scale = max(abs(z * d_n.estimate), abs(b[n] * P_n), abs(rhs))
        bound = 10 * abs(z) * d_n.bound / scale
        report.check("5.53", lhs, rhs, max(tol, bound), scale=scale, detail=detail, **point)

        shift = b[n - 1] + table.alpha_n[n - 1] * a[n - 1] - z * a[n - 1]
        lhs = z * d_nm.estimate - shift * P_nm
        rhs = a[n - 1] * P_n
        scale = max(abs(z * d_nm.estimate), abs(shift * P_nm), abs(rhs))
        bound = 10 * abs(z) * d_nm.bound / scale
        report.check("5.54", lhs, rhs, max(tol, bound), scale=scale, detail=detail, **point)
    return report


def verify_lax(
    n_max: int,
    s: Any,
    params: EnsembleParams,
    tol: Any = None,
    z_samples: Sequence[Any] = LAX_Z_SAMPLES,
) -> VerificationReport:
    """Structure of the triple, zero-curvature in both gauges, the scalar system and s-ladders."""
    params = params.with_s(s)
    tol = params.ctx.default_tol() if tol is None else tol
    aux = aux_from_moments(n_max + 1, params)
    params = aux.params
    mp = params.mp
    s_mp, alpha = params.s_mp, params.alpha_mp
    report = VerificationReport(suite="lax")
    for n in range(n_max + 1):
        point = dict(n=n, alpha=alpha, s=s_mp)
        lax = _lax_from_aux(n, aux)
        A1, A2, U0 = lax.A1, lax.A2, lax.U0
        scale = max(abs(A2[0, 0]), abs(s_mp))
        report.check("tr A2", A2[0, 0] + A2[1, 1], 0, tol, scale=scale, **point)
        report.check("tr A1", A1[0, 0] + A1[1, 1], 0, tol, scale=abs(A1[0, 0]), **point)
        report.check("det A2", mp.det(A2), -(s_mp**2) / 4, tol, **point)
        report.check("U0 product", U0[0, 1] * U0[1, 0], -1, tol, **point)
        if n >= 1:
            report.check("A1 product", A1[0, 1] * A1[1, 0], -lax.beta_n, tol, **point)

        per_gauge = []
        for c in GAUGES:
            res = compatibility_residuals(n, s_mp, params, z_samples, gauge=c, aux=aux)
            detail = f"gauge={c}"
            report.record("5.19", res.zero_curvature, tol, detail=detail, **point)
            report.record("5.20", res.s_shift, tol, detail=detail, **point)
            report.record("5.21", res.z_shift, tol, detail=detail, **point)
            per_gauge.append(res)
        report.record("gauge-invariance", gauge_discrepancy(per_gauge), tol, **point)

        report.extend(jm_scalar_system(n, s_mp, params, tol))
        if n >= 1:
            report.extend(s_ladder_check(n, z_samples, s_mp, params, tol))
    logger.debug("lax.verified", n_max=n_max, s=float(s_mp), failed=len(report.failures))
    return report
