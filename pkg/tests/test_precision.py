"""Tests for precision contexts, escalation and residual reports."""

import pytest

from singular_lue.core.errors import ConditioningError, DomainError
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.precision import PrecisionContext, with_precision_escalation
from singular_lue.core.verification import VerificationReport, relative_residual


class TestPrecisionContext:
    """Test derived tolerances and context isolation"""

    def test_tolerances(self):
        ctx = PrecisionContext(bits=256)
        assert ctx.half_precision == ctx.mp.ldexp(1, -128)
        assert ctx.quad_tolerance == ctx.mp.ldexp(1, -240)
        assert 1e-16 < ctx.default_tol() < 1e-15

    def test_default_tol_capped_at_low_precision(self):
        assert PrecisionContext(bits=64).default_tol() == PrecisionContext(bits=64).mp.mpf("1e-6")

    def test_contexts_are_private(self):
        a, b = PrecisionContext(bits=128), PrecisionContext(bits=512)
        assert a.mp is not b.mp
        assert a.mp.prec == 128 and b.mp.prec == 512

    def test_doubled(self):
        ctx = PrecisionContext(bits=128, quad_tol=1e-30)
        doubled = ctx.doubled()
        assert doubled.bits == 256
        assert doubled.quad_tol is None

    def test_rejects_low_precision(self):
        with pytest.raises(DomainError):
            PrecisionContext(bits=32)


class TestEscalation:
    """Test the single retry at doubled precision"""

    def test_retries_once(self):
        seen = []

        @with_precision_escalation
        def flaky(n, params):
            seen.append(params.ctx.bits)
            if params.ctx.bits < 256:
                raise ConditioningError("lost", lost_bits=100.0, bits=params.ctx.bits)
            return params.ctx.bits

        params = EnsembleParams(alpha=1, s=1, ctx=PrecisionContext(bits=128))
        assert flaky(3, params) == 256
        assert seen == [128, 256]

    def test_keyword_params(self):
        @with_precision_escalation
        def flaky(params=None):
            if params.ctx.bits < 256:
                raise ConditioningError("lost", lost_bits=100.0, bits=params.ctx.bits)
            return params.ctx.bits

        assert flaky(params=EnsembleParams(alpha=1, s=1, ctx=PrecisionContext(bits=128))) == 256

    def test_second_failure_propagates(self):
        @with_precision_escalation
        def always(params):
            raise ConditioningError("lost", lost_bits=500.0, bits=params.ctx.bits)

        with pytest.raises(ConditioningError):
            always(EnsembleParams(alpha=1, s=1, ctx=PrecisionContext(bits=128)))


class TestVerificationReport:
    """Test residual bookkeeping"""

    def test_relative_residual(self):
        assert relative_residual(1.0, 1.0) == 0
        assert relative_residual(0.0, 0.0) == 0
        assert relative_residual(2.0, 1.0) == 0.5
        assert relative_residual(2.0, 1.0, scale=4.0) == 0.25

    def test_pass_and_fail(self):
        report = VerificationReport(suite="demo")
        report.check("ok", 1.0, 1.0 + 1e-17, 1e-15, n=1, alpha=0.5, s=1)
        assert report.passed
        report.check("bad", 1.0, 2.0, 1e-15, n=2, alpha=0.5, s=1)
        assert not report.passed
        assert [r.identity for r in report.failures] == ["bad"]
        assert report.summary() == {"total": 2, "passed": 1, "failed": 1}
        assert report.worst("bad") == 0.5

    def test_nan_residual_fails(self):
        report = VerificationReport(suite="demo")
        report.record("nan", float("nan"), 1.0, n=0, alpha=1, s=1)
        assert not report.passed

    def test_extend(self):
        a = VerificationReport(suite="a")
        b = VerificationReport(suite="b")
        b.record("x", 0, 1, n=0, alpha=1, s=1)
        assert len(a.extend(b).records) == 1
