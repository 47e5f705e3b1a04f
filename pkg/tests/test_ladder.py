"""Tests for a_n, b_n, the MacDonald hierarchy and the residue identities."""

import pytest

from conftest import close
from singular_lue.core.errors import DegeneratePivotError, DomainError
from singular_lue.core.ladder import (
    AuxRoute,
    aux_from_moments,
    hierarchy_iterate,
    hierarchy_step,
    initial_a0,
    ladder_coefficients,
    verify_compatibility_conditions,
    verify_residue_identities,
)
from singular_lue.core.moments import EnsembleParams


class TestAuxiliaryQuantities:
    """Test a_n, b_n from the moment route"""

    def test_exact_values(self, half, rat):
        aux = aux_from_moments(1, half)
        assert aux.route == AuxRoute.MOMENTS
        assert close(aux.a[0], rat(2, 3))
        assert close(aux.a[1], rat(52, 93))
        assert aux.b[0] == 0
        assert close(aux.b[1], rat(-4, 9))

    def test_derived_quantities(self, half, rat):
        aux = aux_from_moments(1, half)
        assert close(aux.H(1), rat(-2, 3))
        assert close(aux.beta_n(1), rat(31, 18))
        assert close(aux.alpha_n(0), rat(13, 6))
        assert aux.beta_n(0) == 0

    def test_zero_at_laguerre(self, laguerre):
        aux = aux_from_moments(3, laguerre)
        assert all(x == 0 for x in aux.a + aux.b)

    def test_a_positive(self, generic):
        aux = aux_from_moments(5, generic)
        assert all(x > 0 for x in aux.a)

    def test_ladder_coefficients(self, half, rat):
        aux = aux_from_moments(1, half)
        lc = ladder_coefficients(1, aux)
        assert close(lc.eval_A(1), 1 + rat(52, 93))
        assert close(lc.eval_B(2), rat(-1, 2) - rat(1, 9))


class TestHierarchy:
    """Test the forward MacDonald hierarchy"""

    def test_a0_closed_form(self, ctx):
        """Test a_0 = 2s/(1 + 2 sqrt(s)) at alpha = 1/2"""
        for s in (1, 4, "0.25"):
            params = EnsembleParams(alpha="0.5", s=s, ctx=ctx)
            sv = params.s_mp
            assert close(initial_a0(params), 2 * sv / (1 + 2 * ctx.mp.sqrt(sv)))

    def test_first_step(self, half, rat):
        a1, b1 = hierarchy_step(0, rat(2, 3), rat(0), half)
        assert close(a1, rat(52, 93))
        assert close(b1, rat(-4, 9))

    def test_agrees_with_moments(self, generic):
        hier = hierarchy_iterate(5, generic)
        mom = aux_from_moments(5, generic)
        assert hier.route == AuxRoute.HIERARCHY
        for n in range(6):
            assert close(hier.a[n], mom.a[n], 1e-30)
            assert close(hier.b[n], mom.b[n], 1e-30)

    def test_needs_positive_s(self, laguerre):
        with pytest.raises(DomainError):
            hierarchy_iterate(2, laguerre)

    def test_degenerate_pivot(self, half):
        """Test a_n = b_n = 0 at s > 0 makes the linear coefficient vanish"""
        mp = half.mp
        with pytest.raises(DegeneratePivotError) as info:
            hierarchy_step(0, mp.zero, mp.zero, half)
        assert info.value.n == 1


class TestResidueIdentities:
    """Test the identities from the residues of the compatibility conditions"""

    @pytest.mark.parametrize("alpha,s", [("0.5", "1"), ("1.3", "0.3"), ("2", "5")])
    def test_suite_passes(self, ctx, alpha, s):
        report = verify_residue_identities(3, EnsembleParams(alpha=alpha, s=s, ctx=ctx))
        assert report.passed, report.failures
        ids = {r.identity for r in report.records}
        assert {"2.9", "2.10", "2.11", "2.12", "2.13", "2.14", "2.15", "S1", "S2", "S2'"} <= ids

    def test_laguerre_reduction(self, laguerre):
        report = verify_residue_identities(3, laguerre)
        assert report.passed
        assert "laguerre.beta" in {r.identity for r in report.records}

    def test_detects_corrupted_data(self, half):
        aux = aux_from_moments(2, half)
        bad = aux.__class__(aux.params, (aux.a[0], aux.a[1] * 2, aux.a[2]), aux.b, aux.route)
        report = verify_compatibility_conditions(1, bad, 1e-20)
        assert not report.passed


class TestRouteAgreementGrid:
    """Test moments and hierarchy routes on the full acceptance grid"""

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", ["0.3", "0.5", "1.3", "2.0"])
    @pytest.mark.parametrize("s", ["0.1", "1", "5"])
    def test_agree_to_n10(self, ctx, alpha, s):
        params = EnsembleParams(alpha=alpha, s=s, ctx=ctx)
        direct = aux_from_moments(10, params)
        ladder = hierarchy_iterate(10, params)
        for n in range(11):
            assert close(direct.a[n], ladder.a[n], 1e-15), n
            if n > 0:
                assert close(direct.b[n], ladder.b[n], 1e-15), n
