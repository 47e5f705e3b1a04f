"""Tests for the Lax triple, the Jimbo-Miwa variables and the s-ladders."""

from dataclasses import replace

import pytest

from conftest import close
from singular_lue.core.errors import DomainError
from singular_lue.core.lax import (
    CompatibilityResiduals,
    build_lax,
    compatibility_residuals,
    gauge_discrepancy,
    first_integral_theta0,
    jm_params,
    jm_scalar_system,
    s_ladder_check,
    verify_lax,
)
from singular_lue.core.moments import EnsembleParams


class TestLaxMatrices:
    """Test the structure of A1, A2 and U0"""

    def test_exact_structure(self, half, rat):
        lax = build_lax(1, 1, half)
        mp = half.mp
        assert close(mp.det(lax.A2), rat(-1, 4))
        assert lax.A2[0, 0] + lax.A2[1, 1] == 0
        assert lax.A1[0, 0] + lax.A1[1, 1] == 0
        assert close(lax.A1[0, 1] * lax.A1[1, 0], rat(-31, 18))
        assert close(lax.U0[0, 1] * lax.U0[1, 0], -1)

    def test_n0_has_no_lower_entry(self, half):
        lax = build_lax(0, 1, half)
        assert lax.A1[1, 0] == 0

    def test_needs_positive_s(self, laguerre):
        with pytest.raises(DomainError):
            build_lax(1, 0, laguerre)


class TestCompatibility:
    """Test zero curvature and the two shift conditions"""

    def test_exact_point(self, half):
        res = compatibility_residuals(1, 1, half)
        assert res.max() < 1e-40

    @pytest.mark.parametrize("alpha,s", [("0.5", "0.5"), ("1.3", "3")])
    def test_gauge_invariance(self, ctx, alpha, s):
        params = EnsembleParams(alpha=alpha, s=s, ctx=ctx)
        for n in range(4):
            plain = compatibility_residuals(n, s, params)
            gauged = compatibility_residuals(n, s, params, gauge=10)
            assert plain.max() < 1e-40
            assert gauged.max() < 1e-40
            assert gauge_discrepancy([plain, gauged]) < 1e-40

    def test_gauge_discrepancy_spread(self):
        low = CompatibilityResiduals(zero_curvature=1e-70, s_shift=0.0, z_shift=0.0)
        high = CompatibilityResiduals(zero_curvature=1e-70, s_shift=0.0, z_shift=1e-3)
        assert gauge_discrepancy([low, high]) == pytest.approx(1e-3)
        assert gauge_discrepancy([low]) == 0.0

    def test_detects_perturbed_data(self, half, half_aux):
        a = list(half_aux.a)
        a[1] *= 1 + half.mp.mpf("1e-6")
        res = compatibility_residuals(1, 1, half, aux=replace(half_aux, a=tuple(a)))
        assert res.z_shift > 1e-10


class TestJimboMiwa:
    """Test the isomonodromic variables"""

    def test_uv_and_theta0(self, half, rat):
        jm = jm_params(1, 1, half)
        assert close(jm.u * jm.v, rat(-31, 18))
        assert close(jm.zeta, rat(4, 9))
        assert close(first_integral_theta0(jm), rat(1, 2))
        assert jm.theta_inf == rat(-5, 2)

    def test_n0_first_integral_undefined(self, half):
        with pytest.raises(DomainError):
            first_integral_theta0(jm_params(0, 1, half))

    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_scalar_system(self, generic, n):
        report = jm_scalar_system(n, 2, generic)
        assert report.passed, report.failures


class TestSLadder:
    """Test raising and lowering in s at fixed z"""

    def test_exact_point(self, half):
        report = s_ladder_check(1, [2, "-0.5", complex(1, 1)], 1, half)
        assert report.passed, report.failures

    def test_z_zero_identity(self, generic):
        report = s_ladder_check(3, [], 2, generic)
        assert [r.identity for r in report.records] == ["5.53@z=0"]
        assert report.passed

    def test_needs_n_positive(self, half):
        with pytest.raises(DomainError):
            s_ladder_check(0, [1], 1, half)


class TestLaxSuite:
    @pytest.mark.slow
    def test_passes(self, generic):
        report = verify_lax(2, 2, generic)
        assert report.passed, report.failures
        assert "gauge-invariance" in {r.identity for r in report.records}
