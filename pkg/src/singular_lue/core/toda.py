"""s-flow (Toda) relations, the coupled Riccati pair and finite-difference checks.

Derivatives in s are estimated on a symmetric stencil with fourth-order central
differences at steps h and h/2, combined by one Richardson step. The gap between
the extrapolated value and the finer level is used as the truncation bound.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import structlog

from singular_lue.core.errors import DomainError, SingularStateError
from singular_lue.core.ladder import AuxTable, aux_from_moments
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.verification import VerificationReport

logger = structlog.get_logger(__name__)

# Stencil offsets in units of h/2.
STENCIL_OFFSETS = (-4, -2, -1, 0, 1, 2, 4)

# Margin applied to the Richardson bound before it is used as a tolerance.
FD_BOUND_MARGIN = 10


def riccati_rhs(n: int, a_n: Any, b_n: Any, params: EnsembleParams) -> Tuple[Any, Any]:
    """(s da_n/ds, s db_n/ds) from the coupled Riccati pair."""
    if a_n == 0:
        raise SingularStateError("the Riccati pair is singular at a_n = 0", n=n)
    s, alpha = params.s_mp, params.alpha_mp
    sa = 2 * b_n + (2 * n + 1 + alpha + a_n) * a_n - s
    sb = 2 / a_n * (b_n * b_n - s * b_n) + (2 * n + alpha + 1) * b_n - n * s
    return sa, sb


@dataclass(frozen=True)
class Derivative:
    estimate: Any
    bound: Any


def _central_first(f: Dict[int, Any], unit: int, step: Any) -> Any:
    return (f[-2 * unit] - 8 * f[-unit] + 8 * f[unit] - f[2 * unit]) / (12 * step)


def _central_second(f: Dict[int, Any], unit: int, step: Any) -> Any:
    return (
        -f[2 * unit] + 16 * f[unit] - 30 * f[0] + 16 * f[-unit] - f[-2 * unit]
    ) / (12 * step**2)


def richardson_first(values: Dict[int, Any], h: Any) -> Derivative:
    coarse = _central_first(values, 2, h)
    fine = _central_first(values, 1, h / 2)
    extrapolated = (16 * fine - coarse) / 15
    return Derivative(extrapolated, abs(extrapolated - fine))


def richardson_second(values: Dict[int, Any], h: Any) -> Derivative:
    coarse = _central_second(values, 2, h)
    fine = _central_second(values, 1, h / 2)
    extrapolated = (16 * fine - coarse) / 15
    return Derivative(extrapolated, abs(extrapolated - fine))


def fd_step(params: EnsembleParams, divisor: int = 5) -> Any:
    """h = s 2^(-bits/divisor)."""
    if params.is_laguerre:
        raise DomainError("finite-difference stencils need s > 0")
    return params.s_mp * params.mp.ldexp(1, -(params.ctx.bits // divisor))


@dataclass(frozen=True)
class Stencil:
    """Any per-point data evaluated at s + k h/2 for k in STENCIL_OFFSETS."""

    params: EnsembleParams
    h: Any
    points: Dict[int, Any]

    @property
    def center(self) -> Any:
        return self.points[0]

    def derivative(self, fn: Callable[[Any], Any]) -> Derivative:
        return richardson_first({k: fn(p) for k, p in self.points.items()}, self.h)

    def s_derivative(self, fn: Callable[[Any], Any]) -> Derivative:
        """s d/ds of fn, with the bound scaled the same way."""
        d = self.derivative(fn)
        s = self.params.s_mp
        return Derivative(s * d.estimate, s * d.bound)

    def second_derivative(self, fn: Callable[[Any], Any]) -> Derivative:
        return richardson_second({k: fn(p) for k, p in self.points.items()}, self.h)


def build_stencil(
    params: EnsembleParams,
    builder: Callable[[EnsembleParams], Any],
    divisor: int = 5,
) -> Stencil:
    h = fd_step(params, divisor)
    s = params.s_mp
    points = {k: builder(params.with_s(s + k * h / 2)) for k in STENCIL_OFFSETS}
    return Stencil(params=params, h=h, points=points)


def aux_stencil(n_max: int, params: EnsembleParams, divisor: int = 5) -> Stencil:
    """Moments-route AuxTables (up to n_max + 1) on the stencil around s."""
    return build_stencil(params, lambda p: aux_from_moments(n_max + 1, p), divisor)


@dataclass(frozen=True)
class TodaSnapshot:
    """Base values at s and s-derivative estimates for one n."""

    params: EnsembleParams
    n: int
    values: Dict[str, Any]
    derivatives: Dict[str, Derivative]


def _log_D(aux: AuxTable, n: int) -> Any:
    assert aux.recurrence is not None
    return aux.recurrence.hankel.log_D(n)


def toda_snapshot(n: int, stencil: Stencil) -> TodaSnapshot:
    params = stencil.params
    mp = params.mp
    aux: AuxTable = stencil.center
    table = aux.recurrence
    assert table is not None

    values = {
        "h_n": table.h[n],
        "a_n": aux.a[n],
        "b_n": aux.b[n],
        "alpha_n": table.alpha_n[n],
        "beta_n": table.beta_n[n],
        "p1": table.p1[n],
        "D_n": table.hankel.D[n],
        "sum_a": aux.sum_a(n),
    }
    if n >= 1:
        values["h_nm1"] = table.h[n - 1]

    def rec(t: AuxTable) -> Any:
        assert t.recurrence is not None
        return t.recurrence

    derivatives = {
        "ln_h_n": stencil.s_derivative(lambda t: mp.log(rec(t).h[n])),
        "alpha_n": stencil.s_derivative(lambda t: rec(t).alpha_n[n]),
        "a_n": stencil.s_derivative(lambda t: t.a[n]),
        "sum_a": stencil.s_derivative(lambda t: t.sum_a(n)),
        "ln_D": stencil.s_derivative(lambda t: _log_D(t, n)),
        "ln_D_second": stencil.second_derivative(lambda t: _log_D(t, n)),
    }
    if n >= 1:
        derivatives["ln_beta_n"] = stencil.s_derivative(lambda t: mp.log(rec(t).beta_n[n]))
        derivatives["p1"] = stencil.s_derivative(lambda t: rec(t).p1[n])
        derivatives["b_n"] = stencil.s_derivative(lambda t: t.b[n])
    return TodaSnapshot(params=params, n=n, values=values, derivatives=derivatives)


def fd_check(
    report: VerificationReport,
    identity: str,
    d: Derivative,
    rhs: Any,
    tol: Any,
    **point: Any,
) -> None:
    scale = max(abs(d.estimate), abs(rhs))
    fd_tol = FD_BOUND_MARGIN * d.bound / scale if scale else d.bound
    report.check(identity, d.estimate, rhs, max(tol, fd_tol), **point)


def verify_toda(
    n_max: int,
    s: Any,
    params: EnsembleParams,
    tol: Any = None,
    divisor: int = 5,
) -> VerificationReport:
    """Differential-difference relations in s for n = 0..n_max, plus the Toda molecule."""
    params = params.with_s(s)
    tol = params.ctx.default_tol() if tol is None else tol
    stencil = aux_stencil(n_max, params, divisor)
    aux: AuxTable = stencil.center
    table = aux.recurrence
    assert table is not None
    alpha, s_mp = params.alpha_mp, params.s_mp
    report = VerificationReport(suite="toda")

    for n in range(n_max + 1):
        snap = toda_snapshot(n, stencil)
        d = snap.derivatives
        a, b = aux.a, aux.b
        point = dict(n=n, alpha=alpha, s=s_mp)

        fd_check(report, "3.1", d["ln_h_n"], -a[n], tol, **point)
        fd_check(report, "3.6", d["alpha_n"], b[n] - b[n + 1], tol, **point)
        beta_next = table.beta_n[n + 1]
        rhs = table.beta_n[n] - beta_next + table.alpha_n[n]
        scale = max(abs(table.beta_n[n]), abs(beta_next), abs(table.alpha_n[n]))
        report.check("3.6b", b[n] - b[n + 1], rhs, tol, scale=scale, **point)

        sa, sb = riccati_rhs(n, a[n], b[n], params)
        fd_check(report, "3.10", d["a_n"], sa, tol, **point)

        if n == 0:
            continue
        fd_check(report, "3.2", d["ln_beta_n"], a[n - 1] - a[n], tol, **point)
        fd_check(report, "3.5", d["p1"], b[n], tol, **point)
        fd_check(report, "3.7", d["sum_a"], -b[n], tol, **point)
        fd_check(report, "3.8", d["ln_D"], -aux.sum_a(n), tol, **point)
        fd_check(report, "3.11", d["b_n"], sb, tol, **point)

        second = d["ln_D_second"]
        lhs = Derivative(second.estimate + n * (n + alpha) / s_mp**2, second.bound)
        fd_check(report, "3.9", lhs, table.hankel.beta(n) / s_mp**2, tol, **point)

    logger.debug("toda.verified", n_max=n_max, s=float(s_mp), failed=len(report.failures))
    return report
