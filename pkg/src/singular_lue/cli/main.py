"""Command-line front end.

Exit status: 0 when every requested check passes, 1 on a failed identity,
2 on a configuration error and 3 on a numerical failure that survived one
precision escalation.
"""

import argparse
import json
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from singular_lue import __version__
from singular_lue.config import get_settings
from singular_lue.core.errors import (
    ConfigurationError,
    DegeneratePivotError,
    DomainError,
    IdentityViolation,
    PrecisionError,
    SingularLUEError,
    SingularStateError,
)
from singular_lue.core.ladder import AuxRoute, aux_from_moments, hierarchy_iterate, verify_residue_identities
from singular_lue.core.lax import build_lax, compatibility_residuals, verify_lax
from singular_lue.core.moments import EnsembleParams, mgf, mgf_curve
from singular_lue.core.orthopoly import recurrence_coeffs, verify_laguerre
from singular_lue.core.painleve import (
    A0_ODE_TOL,
    ODE_TOL,
    aux_from_ode,
    log_det_integral,
    p3_solve,
    sigma_data,
    tau_relations,
    verify_discrete,
    verify_painleve,
    verify_sigma,
)
from singular_lue.core.precision import PrecisionContext
from singular_lue.core.toda import verify_toda
from singular_lue.core.verification import VerificationReport, relative_residual
from singular_lue.observability import configure_logging
from singular_lue.orchestration.sweep import run_sweep
from singular_lue.simulation.mcsim import MCConfig, mc_mgf

logger = structlog.get_logger(__name__)

CSV_COLUMNS = ["n", "alpha", "s", "quantity", "value", "residual", "tol", "pass"]
CSV_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class Command(str, Enum):
    MGF = "mgf"
    RECURRENCE = "recurrence"
    AUX = "aux"
    PAINLEVE = "painleve"
    VERIFY = "verify"
    LAX = "lax"
    MC = "mc"
    TAU = "tau"


class Suite(str, Enum):
    RESIDUE = "residue"
    TODA = "toda"
    SIGMA = "sigma"
    DISCRETE = "discrete"
    PAINLEVE = "painleve"
    LAX = "lax"
    TAU = "tau"
    LAGUERRE = "laguerre"
    ALL = "all"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


# Suites that run at s = 0 or never look at the s grid.
_ZERO_S_SUITES = {Suite.RESIDUE, Suite.LAGUERRE}


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    alpha: str
    n: int = Field(default=1, ge=0)
    n_max: int = Field(default=3, ge=0)
    s_grid: List[str] = Field(default_factory=lambda: ["1"])
    prec_bits: int = Field(default=256, ge=64)
    quad_max_degree: int = Field(default=10, ge=4)
    tol: Optional[float] = Field(default=None, gt=0)
    rtol: float = Field(default=1e-12, gt=0)
    start_fraction: float = Field(default=1e-6, gt=0, lt=1)
    fd_divisor: int = Field(default=5, ge=2)
    seed: int = Field(default=0, ge=0)
    samples: int = Field(default=100_000, ge=1000)
    chunk: int = Field(default=10_000, ge=1)
    suite: Suite = Suite.ALL
    route: AuxRoute = AuxRoute.MOMENTS
    check: bool = False
    format: OutputFormat = OutputFormat.JSON
    output: Optional[Path] = None
    max_workers: int = Field(default=4, ge=1)

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, v: str) -> str:
        if float(v) <= 0:
            raise ValueError("alpha must be positive")
        return v

    @field_validator("s_grid")
    @classmethod
    def _grid_increasing(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("s grid is empty")
        values = [float(x) for x in v]
        if any(x < 0 for x in values):
            raise ValueError("s must be nonnegative")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("s grid must be strictly increasing")
        return v

    @model_validator(mode="after")
    def _zero_s_supported(self) -> "RunConfig":
        if float(self.s_grid[0]) > 0:
            return self
        if self.command in (Command.MGF, Command.RECURRENCE, Command.MC):
            return self
        if self.command == Command.AUX and self.route == AuxRoute.MOMENTS:
            return self
        if self.command == Command.VERIFY and self.suite in _ZERO_S_SUITES:
            return self
        raise ValueError(f"command {self.command.value} needs s > 0")

    def params(self, s: str) -> EnsembleParams:
        """Fresh precision context per grid point; mpmath contexts are not thread safe."""
        return EnsembleParams(alpha=self.alpha, s=s, ctx=self.context())

    def context(self) -> PrecisionContext:
        return PrecisionContext(bits=self.prec_bits, quad_max_degree=self.quad_max_degree)


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    exit_code: int
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    reports: List[VerificationReport] = Field(default_factory=list)


class _Formatter:
    def __init__(self, bits: int):
        self.bits = bits
        self.digits = max(bits // 4, 15)
        self.ctx = PrecisionContext(bits=bits)

    def __call__(self, value: Any) -> Any:
        if value is None:
            return None
        if self.bits <= 53:
            return float(value)
        mp = self.ctx.mp
        return mp.nstr(mp.mpf(value), self.digits, min_fixed=0, max_fixed=0)


def _row(fmt: _Formatter, n: int, alpha: Any, s: Any, quantity: str, value: Any = None, **check: Any) -> Dict[str, Any]:
    return {
        "n": n,
        "alpha": fmt(alpha),
        "s": fmt(s),
        "quantity": quantity,
        "value": fmt(value),
        "residual": check.get("residual"),
        "tol": check.get("tol"),
        "pass": check.get("passed"),
    }


def _report_rows(fmt: _Formatter, report: VerificationReport) -> List[Dict[str, Any]]:
    return [
        {
            "n": r.n,
            "alpha": r.alpha,
            "s": r.s,
            "quantity": f"{report.suite}:{r.identity}" + (f"[{r.detail}]" if r.detail else ""),
            "value": None,
            "residual": r.residual,
            "tol": r.tolerance,
            "pass": r.passed,
        }
        for r in report.records
    ]


def _sweep(config: RunConfig, task: Callable[[str], Any]) -> List[Any]:
    outcomes = run_sweep(config.s_grid, task, config.max_workers)
    for outcome in outcomes:
        if outcome.error is not None:
            raise outcome.error
    return [o.result for o in outcomes]


def _cmd_mgf(config: RunConfig, fmt: _Formatter) -> RunResult:
    params = config.params(config.s_grid[0])
    curve = mgf_curve(config.n, config.s_grid, params, config.max_workers)
    rows = [
        _row(fmt, config.n, params.alpha_mp, s, "mgf", value)
        for s, value in zip(config.s_grid, curve.values)
    ]
    if len(config.s_grid) > 1:
        decreasing = curve.monotone_decreasing
        rows.append(
            _row(fmt, config.n, params.alpha_mp, None, "mgf_monotone_decreasing", passed=decreasing)
        )
        if not decreasing:
            logger.warning("mgf.not_monotone", n=config.n, alpha=config.alpha)
            return RunResult(exit_code=EXIT_FAILED, rows=rows)
    return RunResult(exit_code=EXIT_OK, rows=rows)


def _cmd_recurrence(config: RunConfig, fmt: _Formatter) -> RunResult:
    def task(s: str) -> List[Dict[str, Any]]:
        params = config.params(s)
        table = recurrence_coeffs(config.n_max, params)
        a, sv = params.alpha_mp, params.s_mp
        rows = []
        for n in range(config.n_max + 1):
            rows.append(_row(fmt, n, a, sv, "alpha_n", table.alpha_n[n]))
            if n >= 1:
                rows.append(_row(fmt, n, a, sv, "beta_n", table.beta_n[n]))
            rows.append(_row(fmt, n, a, sv, "h_n", table.h[n]))
            rows.append(_row(fmt, n, a, sv, "p1", table.p1[n]))
        return rows

    return RunResult(exit_code=EXIT_OK, rows=[r for rows in _sweep(config, task) for r in rows])


def _cmd_aux(config: RunConfig, fmt: _Formatter) -> RunResult:
    builders = {
        AuxRoute.MOMENTS: aux_from_moments,
        AuxRoute.HIERARCHY: hierarchy_iterate,
        AuxRoute.TODA_ODE: lambda n_max, p: aux_from_ode(n_max, p, config.rtol),
    }

    def task(s: str) -> List[Dict[str, Any]]:
        params = config.params(s)
        aux = builders[config.route](config.n_max, params)
        a, sv = params.alpha_mp, params.s_mp
        rows = []
        for n in range(config.n_max + 1):
            rows.append(_row(fmt, n, a, sv, f"a_n[{aux.route.value}]", aux.a[n]))
            rows.append(_row(fmt, n, a, sv, f"b_n[{aux.route.value}]", aux.b[n]))
        return rows

    return RunResult(exit_code=EXIT_OK, rows=[r for rows in _sweep(config, task) for r in rows])


def _cmd_painleve(config: RunConfig, fmt: _Formatter) -> RunResult:
    n = config.n
    ode_tol = A0_ODE_TOL if n == 0 else ODE_TOL
    integral_tol = 1e-8

    def task(s: str) -> List[Dict[str, Any]]:
        params = config.params(s)
        mp = params.mp
        a, sv = params.alpha_mp, params.s_mp
        state = p3_solve(n, params, sv, config.rtol, config.start_fraction)
        exact = hierarchy_iterate(n, params).a[n]
        res = float(relative_residual(mp.mpf(state.a), exact))
        rows = [
            _row(fmt, n, a, sv, "a_n[ode]", state.a, residual=res, tol=ode_tol, passed=res <= ode_tol),
            _row(fmt, n, a, sv, "a_n'[ode]", state.a_prime),
        ]
        sigma = sigma_data(n, params)
        rows.append(_row(fmt, n, a, sv, "H_n", sigma.H))
        rows.append(_row(fmt, n, a, sv, "H_n'", sigma.H_prime))
        rows.append(_row(fmt, n, a, sv, "H_n''", sigma.H_second))
        if n >= 1:
            integral = log_det_integral(n, sv, params)
            exact_log = mp.log(mgf(n, params))
            res = float(relative_residual(integral.value, exact_log, scale=max(abs(exact_log), 1)))
            rows.append(
                _row(
                    fmt, n, a, sv, "ln_mgf[integral]", integral.value,
                    residual=res, tol=integral_tol, passed=res <= integral_tol,
                )
            )
        return rows

    rows = [r for rows in _sweep(config, task) for r in rows]
    failed = any(r["pass"] is False for r in rows)
    return RunResult(exit_code=EXIT_FAILED if failed else EXIT_OK, rows=rows)


def _suite_tasks(config: RunConfig) -> Dict[Suite, Callable[[str], VerificationReport]]:
    n_max, tol, divisor = config.n_max, config.tol, config.fd_divisor

    def tau(s: str) -> VerificationReport:
        params = config.params(s)
        report = VerificationReport(suite="tau")
        for n in range(n_max + 1):
            report.extend(tau_relations(n, s, params, tol, divisor))
        return report

    return {
        Suite.RESIDUE: lambda s: verify_residue_identities(n_max, config.params(s), tol),
        Suite.TODA: lambda s: verify_toda(n_max, s, config.params(s), tol, divisor),
        Suite.SIGMA: lambda s: verify_sigma(n_max, config.params(s), tol),
        Suite.DISCRETE: lambda s: verify_discrete(n_max, config.params(s), tol),
        Suite.PAINLEVE: lambda s: verify_painleve(n_max, config.params(s), tol, config.rtol),
        Suite.LAX: lambda s: verify_lax(n_max, s, config.params(s), tol),
        Suite.TAU: tau,
    }


def _cmd_verify(config: RunConfig, fmt: _Formatter) -> RunResult:
    tasks = _suite_tasks(config)
    if config.suite == Suite.ALL:
        suites = list(tasks)
    elif config.suite == Suite.LAGUERRE:
        suites = []
    else:
        suites = [config.suite]

    reports: List[VerificationReport] = []
    for suite in suites:
        reports.extend(_sweep(config, tasks[suite]))
    if config.suite in (Suite.LAGUERRE, Suite.ALL):
        ctx = config.context()
        reports.append(verify_laguerre(config.n_max, config.alpha, ctx, config.tol))

    rows = [row for report in reports for row in _report_rows(fmt, report)]
    passed = all(r.passed for r in reports)
    for report in reports:
        logger.info("verify.suite_done", suite=report.suite, **report.summary())
    return RunResult(exit_code=EXIT_OK if passed else EXIT_FAILED, rows=rows, reports=reports)


def _cmd_lax(config: RunConfig, fmt: _Formatter) -> RunResult:
    n = config.n
    tol = config.tol

    def task(s: str) -> List[Dict[str, Any]]:
        params = config.params(s)
        tol_s = params.ctx.default_tol() if tol is None else tol
        aux = aux_from_moments(n + 1, params)
        lax = build_lax(n, s, params, aux)
        a, sv = params.alpha_mp, params.s_mp
        rows = []
        for name, M in (("A1", lax.A1), ("A2", lax.A2), ("U0", lax.U0)):
            for i in range(2):
                for j in range(2):
                    rows.append(_row(fmt, n, a, sv, f"{name}[{i}{j}]", M[i, j]))
        res = compatibility_residuals(n, s, params, aux=aux)
        for identity, value in (("5.19", res.zero_curvature), ("5.20", res.s_shift), ("5.21", res.z_shift)):
            rows.append(
                _row(fmt, n, a, sv, identity, residual=value, tol=float(tol_s), passed=value <= tol_s)
            )
        return rows

    rows = [r for rows in _sweep(config, task) for r in rows]
    failed = any(r["pass"] is False for r in rows)
    return RunResult(exit_code=EXIT_FAILED if failed else EXIT_OK, rows=rows)


def _cmd_mc(config: RunConfig, fmt: _Formatter) -> RunResult:
    rows = []
    failed = False
    for s in config.s_grid:
        cfg = MCConfig(
            n=max(config.n, 1),
            alpha=float(config.alpha),
            s=float(s),
            samples=config.samples,
            seed=config.seed,
            chunk=config.chunk,
        )
        result = mc_mgf(cfg, config.max_workers)
        rows.append(_row(fmt, cfg.n, cfg.alpha, cfg.s, "mc_mgf", result.estimate))
        rows.append(_row(fmt, cfg.n, cfg.alpha, cfg.s, "mc_std_error", result.std_error))
        if config.check:
            exact = float(mgf(cfg.n, config.params(s)))
            sigmas = abs(result.estimate - exact) / result.std_error if result.std_error else 0.0
            ok = result.within(exact)
            failed = failed or not ok
            rows.append(
                _row(fmt, cfg.n, cfg.alpha, cfg.s, "mc_vs_mgf", exact, residual=sigmas, tol=3.0, passed=ok)
            )
    return RunResult(exit_code=EXIT_FAILED if failed else EXIT_OK, rows=rows)


def _cmd_tau(config: RunConfig, fmt: _Formatter) -> RunResult:
    reports = _sweep(
        config,
        lambda s: tau_relations(config.n, s, config.params(s), config.tol, config.fd_divisor),
    )
    rows = [row for report in reports for row in _report_rows(fmt, report)]
    passed = all(r.passed for r in reports)
    return RunResult(exit_code=EXIT_OK if passed else EXIT_FAILED, rows=rows, reports=reports)


COMMANDS: Dict[Command, Callable[[RunConfig, _Formatter], RunResult]] = {
    Command.MGF: _cmd_mgf,
    Command.RECURRENCE: _cmd_recurrence,
    Command.AUX: _cmd_aux,
    Command.PAINLEVE: _cmd_painleve,
    Command.VERIFY: _cmd_verify,
    Command.LAX: _cmd_lax,
    Command.MC: _cmd_mc,
    Command.TAU: _cmd_tau,
}


def run(config: RunConfig) -> RunResult:
    """Dispatch one command; numerical and domain errors become exit codes."""
    fmt = _Formatter(config.prec_bits)
    try:
        return COMMANDS[config.command](config, fmt)
    except IdentityViolation as e:
        logger.error("run.identity_violation", identity=e.identity, residual=str(e.residual))
        return RunResult(exit_code=EXIT_FAILED)
    except (PrecisionError, DegeneratePivotError, SingularStateError) as e:
        logger.error("run.numerical_failure", error=str(e), **_safe_context(e))
        return RunResult(exit_code=EXIT_NUMERICAL)
    except (DomainError, ConfigurationError) as e:
        logger.error("run.configuration_error", error=str(e))
        return RunResult(exit_code=EXIT_CONFIG)
    except SingularLUEError as e:
        logger.error("run.failed", error=str(e))
        return RunResult(exit_code=EXIT_NUMERICAL)


def _safe_context(e: SingularLUEError) -> Dict[str, str]:
    return {k: str(v) for k, v in e.context.items()}


def _summaries(reports: List[VerificationReport]) -> Dict[str, Dict[str, int]]:
    totals: Dict[str, Dict[str, int]] = {}
    for report in reports:
        entry = totals.setdefault(report.suite, {"total": 0, "passed": 0, "failed": 0})
        for key, count in report.summary().items():
            entry[key] += count
    return totals


def render(result: RunResult, config: RunConfig) -> str:
    if config.format == OutputFormat.CSV:
        frame = pd.DataFrame(result.rows, columns=CSV_COLUMNS)
        return frame.to_csv(index=False)
    payload = {
        "version": __version__,
        "schema": CSV_SCHEMA_VERSION,
        "command": config.command.value,
        "prec_bits": config.prec_bits,
        "exit_code": result.exit_code,
        "rows": result.rows,
        "summary": _summaries(result.reports) if result.reports else None,
    }
    return json.dumps(payload, indent=2)


def emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    output.write_text(text)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", required=True, help="weight exponent alpha > 0")
    common.add_argument("--n", type=int, default=1, help="matrix size / polynomial degree")
    common.add_argument("--n-max", type=int, default=3)
    grid = common.add_mutually_exclusive_group()
    grid.add_argument("--s", help="single deformation parameter s")
    grid.add_argument("--s-grid", help="comma separated, strictly increasing s values")
    common.add_argument("--prec-bits", type=int, default=settings.prec_bits)
    common.add_argument("--tol", type=float, default=settings.tol)
    common.add_argument("--rtol", type=float, default=settings.rtol)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default="json")
    common.add_argument("--output", type=Path, default=None)
    common.add_argument("--workers", type=int, default=settings.max_workers)

    parser = argparse.ArgumentParser(
        prog="singular-lue",
        description="Hankel determinants, Painleve III and Lax checks for the LUE 1/x statistic.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        p = sub.add_parser(command.value, parents=[common])
        if command == Command.VERIFY:
            p.add_argument("--suite", choices=[s.value for s in Suite], default="all")
        if command == Command.AUX:
            p.add_argument("--route", choices=[r.value for r in AuxRoute], default="moments")
        if command == Command.MC:
            p.add_argument("--samples", type=int, default=settings.mc_samples)
            p.add_argument("--seed", type=int, default=settings.mc_seed)
            p.add_argument("--chunk", type=int, default=settings.mc_chunk)
            p.add_argument("--check", action="store_true", help="compare with the determinant route")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    settings = get_settings()
    if args.s_grid is not None:
        s_grid = [x.strip() for x in args.s_grid.split(",") if x.strip()]
    elif args.s is not None:
        s_grid = [args.s]
    else:
        s_grid = ["1"]
    fields: Dict[str, Any] = dict(
        command=args.command,
        alpha=args.alpha,
        n=args.n,
        n_max=args.n_max,
        s_grid=s_grid,
        prec_bits=args.prec_bits,
        quad_max_degree=settings.quad_max_degree,
        tol=args.tol,
        rtol=args.rtol,
        start_fraction=settings.painleve_start_fraction,
        fd_divisor=settings.fd_exponent_divisor,
        format=args.format,
        output=args.output,
        max_workers=args.workers,
    )
    for name in ("suite", "route", "samples", "seed", "chunk", "check"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    return RunConfig(**fields)


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_format)
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValidationError, ValueError) as e:
        logger.error("run.invalid_config", error=str(e))
        return EXIT_CONFIG

    logger.info("run.start", command=config.command.value, alpha=config.alpha, points=len(config.s_grid))
    result = run(config)
    if result.rows or result.exit_code in (EXIT_OK, EXIT_FAILED):
        emit(render(result, config), config.output)
    logger.info("run.finished", command=config.command.value, exit_code=result.exit_code)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
