"""Painleve III for a_n(s), the sigma-forms of H_n and the tau-function relations.

The ODE is singular at s = 0 and its small-s solutions form a one-parameter
family a_n = s/alpha + ... + c s^(1+alpha) + ..., so the conditions a_n(0) = 0,
a_n'(0) = 1/alpha do not select a_n. Orbits are therefore anchored on exact
MacDonald-hierarchy values and integrated in tau = ln s with state (a, s a').
Linearising about a_n gives exponents s^(1 +- alpha), so an error made at s0
grows like (s/s0)^alpha. Each anchored segment spans at most growth_cap^(1/alpha).
"""

import math
import warnings
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Tuple

import numpy as np
import structlog
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from singular_lue.core.errors import DomainError, QuadratureError, SingularStateError
from singular_lue.core.ladder import AuxRoute, AuxTable, aux_from_moments, hierarchy_iterate
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.toda import FD_BOUND_MARGIN, build_stencil, riccati_rhs
from singular_lue.core.verification import VerificationReport, relative_residual

logger = structlog.get_logger(__name__)

DEFAULT_SERIES_ORDER = 8
DEFAULT_GROWTH_CAP = 10.0
SOLVE_GROWTH_CAP = 2.0
DEFAULT_RTOL = 1e-12
A0_ODE_TOL = 1e-10
ODE_TOL = 1e-8
DEFAULT_START_FRACTION = 1e-6
DEFAULT_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class PainleveState:
    n: int
    s: Any
    a: Any
    a_prime: Any


def _terms_scale(*terms: Any) -> Any:
    return max(abs(t) for t in terms)


def p3_rhs(state: PainleveState, params: EnsembleParams) -> Any:
    """a'' = a'^2/a - a'/s + (2n+1+alpha) a^2/s^2 + a^3/s^2 + alpha/s - 1/a."""
    mp = params.mp
    s, a, ap = mp.mpf(state.s), mp.mpf(state.a), mp.mpf(state.a_prime)
    if s == 0 or a == 0:
        raise SingularStateError("Painleve III is singular at a = 0 or s = 0", s=s, a=a)
    n, alpha = state.n, params.alpha_mp
    return ap**2 / a - ap / s + (2 * n + 1 + alpha) * a**2 / s**2 + a**3 / s**2 + alpha / s - 1 / a


def riccati_derivatives(n: int, a: Any, b: Any, params: EnsembleParams) -> Tuple[Any, Any, Any]:
    """(a', b', a'') in closed form from the Riccati pair and its s-derivative."""
    s, alpha = params.s_mp, params.alpha_mp
    sa, sb = riccati_rhs(n, a, b, params)
    a1, b1 = sa / s, sb / s
    a2 = (2 * b1 + (2 * n + alpha + 2 * a) * a1 - 1) / s
    return a1, b1, a2


def p3_residual(n: int, aux: AuxTable) -> Any:
    """Relative residual of Painleve III at exact (a, a', a'') from aux data."""
    params = aux.params
    a = aux.a[n]
    a1, _, a2 = riccati_derivatives(n, a, aux.b[n], params)
    s, alpha = params.s_mp, params.alpha_mp
    terms = (
        a1**2 / a,
        -a1 / s,
        (2 * n + 1 + alpha) * a**2 / s**2,
        a**3 / s**2,
        alpha / s,
        -1 / a,
    )
    return relative_residual(a2, params.mp.fsum(terms), scale=_terms_scale(a2, *terms))


def x_rhs(n: int, s: Any, X: Any, X_prime: Any, params: EnsembleParams) -> Any:
    """X'' for X_n = s/a_n."""
    alpha = params.alpha_mp
    if s == 0 or X == 0:
        raise SingularStateError("the X-form is singular at X = 0 or s = 0", s=s)
    return (
        X_prime**2 / X
        - X_prime / s
        - alpha * X**2 / s**2
        - (2 * n + 1 + alpha) / s
        + X**3 / s**2
        - 1 / X
    )


def x_form_residual(n: int, aux: AuxTable) -> Any:
    params = aux.params
    s = params.s_mp
    a = aux.a[n]
    a1, _, a2 = riccati_derivatives(n, a, aux.b[n], params)
    X = s / a
    X1 = 1 / a - s * a1 / a**2
    X2 = -2 * a1 / a**2 - s * a2 / a**2 + 2 * s * a1**2 / a**3
    rhs = x_rhs(n, s, X, X1, params)
    return relative_residual(X2, rhs, scale=_terms_scale(X2, X1**2 / X, X**3 / s**2, 1 / X))


def jm_painleve_residual(n: int, aux: AuxTable) -> Any:
    """Residual of y'' = y'^2/y - y'/t - (4 theta0 y^2 + 4(1 - theta_inf))/t + 4y^3 - 4/y.

    y = t/a_n with t = sqrt(s), theta0 = alpha and theta_inf = -alpha - 2n.
    """
    params = aux.params
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    t = mp.sqrt(s)
    a = aux.a[n]
    a1, _, a2 = riccati_derivatives(n, a, aux.b[n], params)
    y = t / a
    y1 = (1 - 2 * s * a1 / a) / a
    y2 = -6 * t * a1 / a**2 - 4 * t**3 * a2 / a**2 + 8 * t**3 * a1**2 / a**3
    theta0, theta_inf = alpha, -alpha - 2 * n
    terms = (
        y1**2 / y,
        -y1 / t,
        -(4 * theta0 * y**2 + 4 * (1 - theta_inf)) / t,
        4 * y**3,
        -4 / y,
    )
    return relative_residual(y2, mp.fsum(terms), scale=_terms_scale(y2, *terms))


def series_coefficients(
    n: int,
    params: EnsembleParams,
    order: int = DEFAULT_SERIES_ORDER,
) -> Tuple[Any, ...]:
    """c_1..c_K of the integer-power part of a_n(s) = sum c_k s^k, with c_1 = 1/alpha.

    Coefficients are matched order by order in
    s^2 a a'' - s^2 a'^2 + s a a' - (2n+1+alpha) a^3 - a^4 - alpha s a + s^2 = 0.
    The linear coefficient of c_m is (m-1)^2/alpha - alpha, which vanishes at the
    resonance m = 1 + alpha; the series is cut before it.
    """
    mp = params.mp
    alpha = params.alpha_mp
    size = order + 2

    def mul(p: List[Any], q: List[Any]) -> List[Any]:
        out = [mp.zero] * size
        for i, x in enumerate(p):
            if x == 0:
                continue
            for k in range(size - i):
                out[i + k] += x * q[k]
        return out

    def deriv(p: List[Any]) -> List[Any]:
        return [k * p[k] for k in range(1, size)] + [mp.zero]

    def shift(p: List[Any], by: int) -> List[Any]:
        return ([mp.zero] * by + p)[:size]

    def residual(c: List[Any]) -> List[Any]:
        a1 = deriv(c)
        a2 = deriv(a1)
        a_sq = mul(c, c)
        a_cube = mul(a_sq, c)
        terms = [
            shift(mul(c, a2), 2),
            [-x for x in shift(mul(a1, a1), 2)],
            shift(mul(c, a1), 1),
            [-(2 * n + 1 + alpha) * x for x in a_cube],
            [-x for x in mul(a_cube, c)],
            [-alpha * x for x in shift(c, 1)],
        ]
        total = [mp.fsum(col) for col in zip(*terms)]
        total[2] += 1
        return total

    coeffs = [mp.zero] * size
    coeffs[1] = 1 / alpha
    for m in range(2, order + 1):
        linear = (m - 1) ** 2 / alpha - alpha
        if abs(linear) < params.ctx.half_precision:
            logger.debug("painleve.series_resonance", n=n, order=m)
            break
        coeffs[m] = -residual(coeffs)[m + 1] / linear
    else:
        m = order + 1
    return tuple(coeffs[1:m])


def series_radius(coeffs: Tuple[Any, ...], rtol: float) -> float:
    """Largest s with |c_K| s^(K-1) <= rtol |c_1|."""
    if len(coeffs) < 2 or coeffs[-1] == 0:
        return math.inf
    k = len(coeffs)
    return float((rtol * abs(coeffs[0]) / abs(coeffs[-1])) ** (1.0 / (k - 1)))


def anchor_state(n: int, s: Any, params: EnsembleParams) -> Tuple[PainleveState, Any]:
    """Exact (a_n, a_n') at s from the hierarchy, plus b_n."""
    at = params.with_s(s)
    aux = hierarchy_iterate(n, at)
    a, b = aux.a[n], aux.b[n]
    sa, _ = riccati_rhs(n, a, b, at)
    return PainleveState(n=n, s=at.s_mp, a=a, a_prime=sa / at.s_mp), b


@dataclass(frozen=True)
class OrbitSegment:
    s_start: float
    s_end: float
    solution: Any


@dataclass(frozen=True)
class PainleveOrbit:
    n: int
    alpha: float
    segments: Tuple[OrbitSegment, ...]
    series: Tuple[Any, ...]
    series_radius: float

    @property
    def s_start(self) -> float:
        return self.segments[0].s_start

    @property
    def s_end(self) -> float:
        return self.segments[-1].s_end

    def _segment(self, s: float) -> OrbitSegment:
        for seg in self.segments:
            if seg.s_start * (1 - 1e-14) <= s <= seg.s_end * (1 + 1e-14):
                return seg
        raise DomainError("s outside the integrated orbit", s=s)

    def values(self, tau: float) -> Tuple[float, float]:
        """(a, s a') at s = e^tau."""
        a, A = self._segment(math.exp(tau)).solution(tau)
        return float(a), float(A)

    def state(self, s: float) -> PainleveState:
        a, A = self.values(math.log(s))
        return PainleveState(n=self.n, s=s, a=a, a_prime=A / s)


def _integrate_segment(
    n: int,
    alpha: float,
    start: PainleveState,
    s_end: float,
    rtol: float,
) -> OrbitSegment:
    s0 = float(start.s)
    a0 = float(start.a)
    A0 = float(start.s * start.a_prime)
    lin = 2 * n + 1 + alpha

    def rhs(tau: float, y: np.ndarray) -> List[float]:
        s = math.exp(tau)
        a, A = y
        return [A, A * A / a + lin * a * a + a**3 + alpha * s - s * s / a]

    def vanish(tau: float, y: np.ndarray) -> float:
        return y[0]

    vanish.terminal = True  # type: ignore[attr-defined]

    atol = rtol * 1e-6 * max(abs(a0), abs(A0))
    sol = solve_ivp(
        rhs,
        (math.log(s0), math.log(s_end)),
        [a0, A0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=vanish,
    )
    end = sol.y[:, -1]
    if sol.status != 0 or not np.all(np.isfinite(end)) or end[0] <= 0:
        logger.warning("painleve.orbit_failed", n=n, s_start=s0, s_end=s_end, message=sol.message)
        raise SingularStateError(
            f"Painleve orbit left the regular region: {sol.message}",
            n=n,
            s_start=s0,
            s_end=s_end,
        )
    return OrbitSegment(s_start=s0, s_end=float(s_end), solution=sol.sol)


def p3_orbit(
    n: int,
    params: EnsembleParams,
    s_start: float,
    s_end: float,
    rtol: float = DEFAULT_RTOL,
    growth_cap: float = DEFAULT_GROWTH_CAP,
) -> PainleveOrbit:
    """Hierarchy-anchored orbit covering [s_start, s_end] in geometric segments."""
    if not 0 < s_start < s_end:
        raise DomainError("orbit needs 0 < s_start < s_end", s_start=s_start, s_end=s_end)
    alpha = float(params.alpha_mp)
    ratio = growth_cap ** (1.0 / alpha)
    count = max(1, math.ceil(math.log(s_end / s_start) / math.log(ratio)))
    bounds = np.geomspace(s_start, s_end, count + 1)
    segments = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        start, _ = anchor_state(n, repr(float(lo)), params)
        segments.append(_integrate_segment(n, alpha, start, float(hi), rtol))
    coeffs = series_coefficients(n, params)
    logger.debug("painleve.orbit", n=n, segments=len(segments), s_start=s_start, s_end=s_end)
    return PainleveOrbit(
        n=n,
        alpha=alpha,
        segments=tuple(segments),
        series=coeffs,
        series_radius=series_radius(coeffs, rtol),
    )


def start_point(
    s_target: float,
    alpha: float,
    start_fraction: float = DEFAULT_START_FRACTION,
    growth_cap: float = SOLVE_GROWTH_CAP,
) -> float:
    """s0 for a single anchored segment ending at s_target.

    start_fraction is a floor on s0/s_target; the segment never spans more
    than growth_cap^(1/alpha) in s.
    """
    fraction = max(start_fraction, min(0.5, growth_cap ** (-1.0 / alpha)))
    s0 = s_target * fraction
    if not 0 < s0 < s_target:
        raise SingularStateError("no admissible start point", s_target=s_target)
    return s0


def p3_solve(
    n: int,
    params: EnsembleParams,
    s_target: Any,
    rtol: float = DEFAULT_RTOL,
    start_fraction: float = DEFAULT_START_FRACTION,
    growth_cap: float = SOLVE_GROWTH_CAP,
) -> PainleveState:
    """a_n(s_target) by integrating Painleve III from an anchored start."""
    s_target = float(params.mp.mpf(s_target))
    if s_target <= 0:
        raise DomainError("p3_solve needs s_target > 0", s_target=s_target)
    s0 = start_point(s_target, float(params.alpha_mp), start_fraction, growth_cap)
    orbit = p3_orbit(n, params, s0, s_target, rtol, growth_cap)
    return orbit.state(s_target)


def aux_from_ode(n_max: int, params: EnsembleParams, rtol: float = DEFAULT_RTOL) -> AuxTable:
    """a_n from Painleve III; b_n recovered from s a_n' by the first Riccati equation."""
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    a: List[Any] = []
    b: List[Any] = []
    for n in range(n_max + 1):
        state = p3_solve(n, params, s, rtol)
        a_n = mp.mpf(state.a)
        sa = s * mp.mpf(state.a_prime)
        a.append(a_n)
        b.append((sa - (2 * n + 1 + alpha + a_n) * a_n + s) / 2)
    return AuxTable(params, tuple(a), tuple(b), AuxRoute.TODA_ODE)


@dataclass(frozen=True)
class QuarticRoot:
    n: int
    s: Any
    X: Any
    residual: Any


def quartic_root(n: int, params: EnsembleParams) -> QuarticRoot:
    """The positive root of X^4 - alpha X^3 - (2n+1+alpha) s X - s^2 = 0."""
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    if s <= 0:
        raise DomainError("the quartic needs s > 0", s=s)
    coeffs = [1, -alpha, 0, -(2 * n + 1 + alpha) * s, -(s**2)]
    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=params.ctx.bits)
    tiny = params.ctx.half_precision
    positive = [mp.re(r) for r in roots if abs(mp.im(r)) <= tiny * abs(r) and mp.re(r) > 0]
    if len(positive) != 1:
        raise DomainError("expected exactly one positive quartic root", n=n, s=s)
    X = positive[0]
    terms = (X**4, alpha * X**3, (2 * n + 1 + alpha) * s * X, s**2)
    value = X**4 - alpha * X**3 - (2 * n + 1 + alpha) * s * X - s**2
    return QuarticRoot(n=n, s=s, X=X, residual=abs(value) / _terms_scale(*terms))


@dataclass(frozen=True)
class SigmaData:
    """H_n with its first two s-derivatives; alpha_n is None where its formula is 0/0."""

    n: int
    s: Any
    H: Any
    H_prime: Any
    H_second: Any
    alpha_n: Optional[Any]
    beta_n: Any


def sigma_data(n: int, params: EnsembleParams, aux: Optional[AuxTable] = None) -> SigmaData:
    if params.is_laguerre:
        raise DomainError("H_n' = b_n/s needs s > 0")
    aux = aux if aux is not None else aux_from_moments(n, params)
    params = aux.params
    mp = params.mp
    s, alpha = params.s_mp, params.alpha_mp
    H = aux.H(n)
    b = aux.b[n]
    H1 = b / s
    if n == 0:
        H2 = mp.zero
    else:
        _, sb = riccati_rhs(n, aux.a[n], b, params)
        H2 = (sb - b) / s**2
    denom = s * H2 + n - (2 * n + alpha) * H1
    alpha_n = None if denom == 0 else 2 * n + 1 + alpha + 2 * s * H1 * (H1 - 1) / denom
    beta_n = n * (n + alpha) + s * H1 - H
    return SigmaData(n=n, s=s, H=H, H_prime=H1, H_second=H2, alpha_n=alpha_n, beta_n=beta_n)


def sigma_form_terms(sigma: SigmaData, params: EnsembleParams) -> Tuple[Any, Any, Any]:
    """((sH'')^2, [n - (2n+alpha)H']^2, 4[n(n+alpha) + sH' - H] H'(H' - 1))."""
    n, s = sigma.n, sigma.s
    alpha = params.alpha_mp
    H, H1, H2 = sigma.H, sigma.H_prime, sigma.H_second
    lhs = (s * H2) ** 2
    square = (n - (2 * n + alpha) * H1) ** 2
    product = 4 * (n * (n + alpha) + s * H1 - H) * H1 * (H1 - 1)
    return lhs, square, product


def sigma_form_residual(sigma: SigmaData, params: EnsembleParams) -> Any:
    lhs, square, product = sigma_form_terms(sigma, params)
    return lhs - (square - product)


@dataclass(frozen=True)
class DiscreteSigmaData:
    n: int
    delta2: Any
    a_n: Any
    b_n: Any
    alpha_n: Any
    beta_n: Any


def _delta2_denominator(n: int, delta2: Any, params: EnsembleParams) -> Any:
    denom = 2 * n + params.alpha_mp + delta2
    if denom == 0:
        raise DomainError("2n + alpha + delta^2 H_n vanishes", n=n)
    return denom


def discrete_relations(H_nm1: Any, H_n: Any, H_np1: Any, n: int, params: EnsembleParams) -> DiscreteSigmaData:
    """a_n, b_n, alpha_n, beta_n from H_{n-1}, H_n, H_{n+1}."""
    s, alpha = params.s_mp, params.alpha_mp
    delta2 = H_nm1 - H_np1
    denom = _delta2_denominator(n, delta2, params)
    nn = n * (n + alpha)
    b_n = (n * s + delta2 * (H_n - nn)) / denom
    beta_n = nn + (n * s - nn * delta2 - (2 * n + alpha) * H_n) / denom
    return DiscreteSigmaData(
        n=n,
        delta2=delta2,
        a_n=H_n - H_np1,
        b_n=b_n,
        alpha_n=2 * n + 1 + alpha + H_n - H_np1,
        beta_n=beta_n,
    )


def discrete_sigma_terms(
    H_nm1: Any, H_n: Any, H_np1: Any, n: int, params: EnsembleParams
) -> Tuple[Any, Any]:
    s, alpha = params.s_mp, params.alpha_mp
    delta2 = H_nm1 - H_np1
    denom = _delta2_denominator(n, delta2, params)
    shifted = H_n - n * (n + alpha)
    lhs = (shifted * delta2 + n * s) * ((shifted - s) * delta2 - (n + alpha) * s)
    rhs = denom * (n * s + (2 * n + alpha) * (n * (n + alpha) - H_n)) * (H_n - H_np1) * (H_nm1 - H_n)
    return lhs, rhs


def discrete_sigma_residual(H_nm1: Any, H_n: Any, H_np1: Any, n: int, params: EnsembleParams) -> Any:
    lhs, rhs = discrete_sigma_terms(H_nm1, H_n, H_np1, n, params)
    return lhs - rhs


def verify_sigma(n_max: int, params: EnsembleParams, tol: Any = None) -> VerificationReport:
    """sigma-form of H_n and the recurrence coefficients rebuilt from (H, H', H'')."""
    tol = params.ctx.default_tol() if tol is None else tol
    aux = aux_from_moments(n_max, params)
    table = aux.recurrence
    assert table is not None
    params = aux.params
    report = VerificationReport(suite="sigma")
    for n in range(n_max + 1):
        point = dict(n=n, alpha=params.alpha_mp, s=params.s_mp)
        sigma = sigma_data(n, params, aux)
        lhs, square, product = sigma_form_terms(sigma, params)
        report.check("3.24", lhs, square - product, tol, scale=_terms_scale(lhs, square, product), **point)
        report.check(
            "3.29",
            sigma.beta_n,
            table.beta_n[n],
            tol,
            scale=_terms_scale(sigma.beta_n, n * (n + params.alpha_mp)),
            **point,
        )
        if sigma.alpha_n is not None:
            report.check("3.28", sigma.alpha_n, table.alpha_n[n], tol, **point)
    return report


def verify_discrete(n_max: int, params: EnsembleParams, tol: Any = None) -> VerificationReport:
    """Discrete sigma-form in n and its mixed relations with the continuous one."""
    tol = params.ctx.default_tol() if tol is None else tol
    aux = aux_from_moments(n_max + 1, params)
    table = aux.recurrence
    assert table is not None
    params = aux.params
    alpha, s = params.alpha_mp, params.s_mp
    H = [aux.H(k) for k in range(n_max + 2)]
    report = VerificationReport(suite="discrete")
    for n in range(1, n_max + 1):
        point = dict(n=n, alpha=alpha, s=s)
        lhs, rhs = discrete_sigma_terms(H[n - 1], H[n], H[n + 1], n, params)
        report.check("4.5", lhs, rhs, tol, **point)

        rel = discrete_relations(H[n - 1], H[n], H[n + 1], n, params)
        report.check("4.4", rel.b_n, aux.b[n], tol, **point)
        report.check("4.6", rel.alpha_n, table.alpha_n[n], tol, **point)
        report.check("4.7", rel.beta_n, table.beta_n[n], tol, **point)

        sigma = sigma_data(n, params, aux)
        H1, H2 = sigma.H_prime, sigma.H_second
        denom = s * H2 + n - (2 * n + alpha) * H1
        report.check("4.8", H[n] - H[n + 1], 2 * s * H1 * (H1 - 1) / denom, tol, **point)
        report.check(
            "4.9",
            rel.beta_n - n * (n + alpha),
            s * H1 - H[n],
            tol,
            scale=_terms_scale(rel.beta_n, s * H1, H[n]),
            **point,
        )
    return report


@dataclass(frozen=True)
class LogDetIntegral:
    """ln(D_n(s)/D_n(0)) from the a_n form and from the X_n = t/a_n form."""

    n: int
    s: float
    value: float
    value_x: float
    abserr: float
    t_start: float


def _bracket_a(n: int, alpha: float, t: float, a: float, A: float) -> float:
    return (
        t / 2
        - (t / a - alpha) ** 2 / 4
        - a * (n + alpha / 2)
        - a * a / 4
        + (1 - A / a) ** 2 / 4
    )


def _bracket_x(n: int, alpha: float, t: float, a: float, A: float) -> float:
    X = t / a
    X1 = (1 - A / a) / a
    return (
        t / 2
        - (X - alpha) ** 2 / 4
        - (n + alpha / 2) * t / X
        - t * t / (4 * X * X)
        + t * t * X1 * X1 / (4 * X * X)
    )


def _quad(fn: Callable[[float], float], lo: float, hi: float, quad_tol: float) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            return quad(fn, lo, hi, epsabs=quad_tol * 1e-3, epsrel=quad_tol, limit=200)
        except IntegrationWarning as e:
            logger.warning("quadrature.failed", what="log_det_integral", reason=str(e))
            raise QuadratureError(f"log-determinant quadrature failed: {e}") from e


def log_det_integral(
    n: int,
    s: Any,
    params: EnsembleParams,
    quad_tol: float = DEFAULT_QUAD_TOL,
    rtol: Optional[float] = None,
    growth_cap: float = DEFAULT_GROWTH_CAP,
) -> LogDetIntegral:
    """Integrate [bracket](t) dt/t from 0 to s along the Painleve orbit.

    The bracket vanishes as t -> 0, with leading terms of order t and t^(2 alpha);
    the piece below t_start is taken as f(t_start) / min(1, 2 alpha).
    """
    s_f = float(params.mp.mpf(s))
    if s_f < 0:
        raise DomainError("s must be nonnegative", s=s)
    if s_f == 0:
        return LogDetIntegral(n=n, s=0.0, value=0.0, value_x=0.0, abserr=0.0, t_start=0.0)
    alpha = float(params.alpha_mp)
    rtol = quad_tol * 1e-2 if rtol is None else rtol
    eps = (1e-2 * quad_tol) ** (1.0 / min(1.0, 2 * alpha))
    t_start = s_f * min(1e-3, max(1e-30, eps))
    orbit = p3_orbit(n, params, t_start, s_f, rtol, growth_cap)

    def integrand(bracket: Callable[..., float]) -> Callable[[float], float]:
        def f(tau: float) -> float:
            a, A = orbit.values(tau)
            return bracket(n, alpha, math.exp(tau), a, A)

        return f

    results = []
    for bracket in (_bracket_a, _bracket_x):
        f = integrand(bracket)
        total, err = f(math.log(t_start)) / min(1.0, 2 * alpha), 0.0
        for seg in orbit.segments:
            value, e = _quad(f, math.log(seg.s_start), math.log(seg.s_end), quad_tol)
            total += value
            err += e
        results.append((total, err))
    (value, err), (value_x, err_x) = results
    return LogDetIntegral(
        n=n, s=s_f, value=value, value_x=value_x, abserr=max(err, err_x), t_start=t_start
    )


def verify_painleve(
    n_max: int,
    params: EnsembleParams,
    tol: Any = None,
    rtol: float = DEFAULT_RTOL,
    ode_tol: float = ODE_TOL,
    a0_tol: float = A0_ODE_TOL,
) -> VerificationReport:
    """Algebraic checks of the three Painleve forms and ODE-vs-hierarchy agreement."""
    tol = params.ctx.default_tol() if tol is None else tol
    aux = aux_from_moments(n_max, params)
    params = aux.params
    mp = params.mp
    report = VerificationReport(suite="painleve")
    hierarchy = hierarchy_iterate(n_max, params)
    for n in range(n_max + 1):
        point = dict(n=n, alpha=params.alpha_mp, s=params.s_mp)
        report.record("3.12", p3_residual(n, aux), tol, **point)
        report.record("3.14", x_form_residual(n, aux), tol, **point)
        report.record("p3-jm", jm_painleve_residual(n, aux), tol, **point)

        coeffs = series_coefficients(n, params)
        report.check("3.13", coeffs[0], 1 / params.alpha_mp, tol, **point)

        root = quartic_root(n, params)
        report.record("3.15", root.residual, params.ctx.half_precision, **point)

        state = p3_solve(n, params, params.s_mp, rtol)
        if n == 0:
            report.check("a0-bessel-ratio", mp.mpf(state.a), hierarchy.a[0], a0_tol, **point)
        else:
            report.check("ode-vs-hierarchy", mp.mpf(state.a), hierarchy.a[n], ode_tol, **point)
    return report


def tau_relations(
    n: int,
    s: Any,
    params: EnsembleParams,
    tol: Any = None,
    divisor: int = 5,
) -> VerificationReport:
    """Hamiltonian forms of d ln tau / dt and the shifted log-derivative of D_n."""
    params = params.with_s(s)
    tol = params.ctx.default_tol() if tol is None else tol
    stencil = build_stencil(params, lambda p: aux_from_moments(n + 1, p), divisor)
    aux: AuxTable = stencil.center
    table = aux.recurrence
    assert table is not None
    mp = params.mp
    alpha, s_mp = params.alpha_mp, params.s_mp
    t = mp.sqrt(s_mp)
    a, b = aux.a[n], aux.b[n]
    beta = table.beta_n[n]
    H = aux.H(n)
    nn = n * (n + alpha)
    point = dict(n=n, alpha=alpha, s=s_mp)
    detail = "beta_0 = sH' - H" if n == 0 else None
    report = VerificationReport(suite="tau")

    h_beta = (-2 * beta + 2 * b - s_mp + nn) / t
    h_sigma = 2 * H / t - t - nn / t
    scale = _terms_scale(h_beta, 2 * beta / t, t, nn / t)
    report.check("6.11=6.13", h_beta, h_sigma, tol, scale=scale, detail=detail, **point)

    y, zeta = t / a, -b / t
    theta0, theta_inf = alpha, -alpha - 2 * n
    h_canonical = (
        2 * y**2 * zeta**2
        + 2 * (t * y**2 + theta_inf * y - t) * zeta
        + (theta0 + theta_inf) * t * y
        - t**2
        - (theta0**2 - theta_inf**2) / 4
    ) / t
    report.check("6.16", h_canonical, h_beta, tol, scale=scale, detail=detail, **point)

    two_uv = (theta0 + theta_inf) * t * y + 2 * zeta * y * theta_inf + 2 * y**2 * zeta * (zeta + t)
    report.check(
        "monodromy-uv",
        -2 * beta,
        two_uv,
        tol,
        scale=_terms_scale(2 * beta, (theta0 + theta_inf) * t * y, 2 * zeta * y * theta_inf),
        **point,
    )

    if n >= 1:
        local = nn + b - (n * s_mp - (2 * n + alpha) * b) / a + (b * b - s_mp * b) / a**2
        report.check("6.9", H, local, tol, scale=_terms_scale(H, nn, local), **point)

    def log_tau(t_aux: AuxTable) -> Any:
        assert t_aux.recurrence is not None
        sp = t_aux.params.s_mp
        return t_aux.recurrence.hankel.log_D(n) - sp / 2 - nn / 2 * mp.log(sp)

    d = stencil.s_derivative(log_tau)
    rhs = t / 2 * h_sigma
    scale = max(abs(d.estimate), abs(rhs), abs(s_mp) / 2, abs(nn) / 2)
    fd_tol = FD_BOUND_MARGIN * d.bound / scale
    report.check("6.14", d.estimate, rhs, max(tol, fd_tol), scale=scale, **point)
    return report
