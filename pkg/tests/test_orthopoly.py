"""Tests for recurrence coefficients and polynomial evaluation."""

import pytest

from conftest import close
from singular_lue.core.errors import DomainError
from singular_lue.core.ladder import aux_from_moments
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.orthopoly import (
    eval_pn,
    ode_residual,
    pn_zero_ratio,
    poly_coefficients,
    recurrence_coeffs,
    verify_laguerre,
    verify_orthogonality,
)


class TestRecurrence:
    """Test alpha_n, beta_n and p1(n)"""

    def test_laguerre_limit(self, laguerre):
        table = recurrence_coeffs(4, laguerre)
        for n in range(5):
            assert close(table.alpha_n[n], 2 * n + 1 + laguerre.alpha_mp)
        for n in range(1, 5):
            assert close(table.beta_n[n], n * (n + laguerre.alpha_mp))
        assert table.beta_n[0] == 0

    @pytest.mark.parametrize("alpha", ["0.5", "1.3"])
    def test_near_laguerre(self, ctx, alpha):
        """Test s = 1e-8 stays within 1e-6 of 2n+1+alpha and n(n+alpha)"""
        params = EnsembleParams(alpha=alpha, s="1e-8", ctx=ctx)
        table = recurrence_coeffs(10, params)
        a = params.alpha_mp
        for n in range(11):
            assert abs(table.alpha_n[n] - (2 * n + 1 + a)) <= 1e-6
        for n in range(1, 11):
            assert abs(table.beta_n[n] - n * (n + a)) <= 1e-6

    def test_exact_values(self, half, rat):
        table = recurrence_coeffs(2, half)
        assert close(table.alpha_n[0], rat(13, 6))
        assert close(table.beta_n[1], rat(31, 18))
        assert close(table.alpha_n[1], rat(7, 2) + rat(52, 93))

    def test_p1_is_minus_partial_sum(self, generic):
        table = recurrence_coeffs(3, generic)
        mp = generic.mp
        assert table.p1[0] == 0
        for n in range(1, 5):
            assert close(table.p1[n], -mp.fsum(table.alpha_n[:n]), 1e-50)

    def test_negative_order(self, half):
        with pytest.raises(DomainError):
            recurrence_coeffs(-1, half)


class TestPolynomials:
    """Test P_n values, coefficients and orthogonality"""

    def test_degree_one(self, half, rat):
        value = eval_pn(1, 2, half)
        assert close(value.value, 2 - rat(13, 6))
        assert value.derivative == 1
        assert value.second_derivative == 0

    def test_coefficients_match_evaluation(self, generic):
        table = recurrence_coeffs(4, generic)
        polys = poly_coefficients(4, table)
        z = generic.mp.mpf("0.9")
        for n, coeffs in enumerate(polys):
            direct = generic.mp.fsum(c * z**k for k, c in enumerate(coeffs))
            assert close(direct, eval_pn(n, z, generic, table).value, 1e-50)
            assert coeffs[-1] == 1

    def test_orthogonality(self, generic):
        report = verify_orthogonality(4, recurrence_coeffs(4, generic))
        assert report.passed

    def test_zero_ratio_laguerre(self, laguerre, ctx):
        mp = ctx.mp
        a = laguerre.alpha_mp
        assert close(pn_zero_ratio(3, laguerre), mp.gamma(3 + a + 1) / mp.gamma(a + 1), 1e-30)

    def test_zero_ratio_deformed(self, generic):
        assert pn_zero_ratio(2, generic) > 0
        assert pn_zero_ratio(0, generic) == 1

    def test_ladder_ode(self, generic):
        aux = aux_from_moments(3, generic)
        table = aux.recurrence
        for n in range(4):
            for z in ("0.7", "2.5", "-1.2"):
                res = ode_residual(n, z, table, aux.a[n], aux.b[n], aux.sum_a(n))
                assert res < 1e-40

    def test_ode_singular_at_origin(self, generic):
        aux = aux_from_moments(1, generic)
        with pytest.raises(DomainError):
            ode_residual(1, 0, aux.recurrence, aux.a[1], aux.b[1], aux.sum_a(1))


class TestLaguerreSuite:
    def test_passes(self, ctx):
        report = verify_laguerre(5, "0.5", ctx)
        assert report.passed
        assert {r.identity for r in report.records} >= {"laguerre.alpha", "D_n(0)", "barnes-g", "P_n(0)"}
