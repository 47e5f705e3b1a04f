"""Residual records and reports shared by every verification suite."""

import math
from typing import Any, Dict, List, Optional

import structlog
from pydantic import BaseModel, Field

logger = structlog.get_logger(__name__)


def relative_residual(lhs: Any, rhs: Any, scale: Any = None) -> Any:
    """|lhs - rhs| over max(|lhs|, |rhs|), or over ``scale`` when one is given.

    Falls back to the absolute difference when both sides vanish.
    """
    diff = abs(lhs - rhs)
    denom = abs(scale) if scale is not None else max(abs(lhs), abs(rhs))
    if denom == 0:
        return diff
    return diff / denom


def _to_float(value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError, OverflowError):
        return math.nan


class VerificationRecord(BaseModel):
    identity: str
    n: int
    alpha: float
    s: float
    residual: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None


class VerificationReport(BaseModel):
    """Per-identity records for one suite; the suite passes iff every record does."""

    suite: str
    records: List[VerificationRecord] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> List[VerificationRecord]:
        return [r for r in self.records if not r.passed]

    def summary(self) -> Dict[str, int]:
        failed = len(self.failures)
        return {"total": len(self.records), "passed": len(self.records) - failed, "failed": failed}

    def worst(self, identity: str) -> float:
        residuals = [r.residual for r in self.records if r.identity == identity]
        return max(residuals, default=0.0)

    def record(
        self,
        identity: str,
        residual: Any,
        tolerance: Any,
        *,
        n: int,
        alpha: Any,
        s: Any,
        detail: Optional[str] = None,
    ) -> VerificationRecord:
        res = _to_float(residual)
        tol = _to_float(tolerance)
        passed = not math.isnan(res) and res <= tol
        entry = VerificationRecord(
            identity=identity,
            n=n,
            alpha=_to_float(alpha),
            s=_to_float(s),
            residual=res,
            tolerance=tol,
            passed=passed,
            detail=detail,
        )
        if not passed:
            logger.warning(
                "verify.identity_failed",
                suite=self.suite,
                identity=identity,
                n=n,
                s=entry.s,
                residual=res,
                tolerance=tol,
            )
        self.records.append(entry)
        return entry

    def check(
        self,
        identity: str,
        lhs: Any,
        rhs: Any,
        tolerance: Any,
        *,
        n: int,
        alpha: Any,
        s: Any,
        scale: Any = None,
        detail: Optional[str] = None,
    ) -> VerificationRecord:
        return self.record(
            identity,
            relative_residual(lhs, rhs, scale),
            tolerance,
            n=n,
            alpha=alpha,
            s=s,
            detail=detail,
        )

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.records.extend(other.records)
        return self
