"""Tests for MacDonald functions and the Laguerre Hankel determinant."""

import pytest

from conftest import close
from singular_lue.core.errors import DomainError
from singular_lue.core.precision import PrecisionContext
from singular_lue.core.specialfun import (
    barnes_g_ratio,
    bessel_k,
    bessel_k_halfint,
    bessel_k_sequence,
    laguerre_hankel_d0,
    log_hankel_d0,
)


class TestBesselK:
    """Test quadrature and recurrence values of K_nu"""

    def test_half_order_closed_form(self, ctx):
        """Test K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}"""
        mp = ctx.mp
        x = mp.mpf(2)
        exact = mp.sqrt(mp.pi / (2 * x)) * mp.exp(-x)
        assert close(bessel_k("0.5", x, ctx), exact)

    def test_matches_halfint_sum(self, ctx):
        """Test the quadrature/recurrence path against the terminating sum"""
        for p in range(5):
            nu = ctx.mp.mpf(p) + ctx.mp.mpf("0.5")
            assert close(bessel_k(nu, "1.7", ctx), bessel_k_halfint(p, "1.7", ctx))

    def test_against_mpmath_besselk(self, ctx):
        """Test a generic order against mpmath's own besselk"""
        mp = ctx.mp
        assert close(bessel_k("1.3", "0.8", ctx), mp.besselk(mp.mpf("1.3"), mp.mpf("0.8")), 1e-60)

    def test_sequence_recurrence(self, ctx):
        """Test that the ladder matches independent evaluations"""
        ladder = bessel_k_sequence("2.3", 4, 3, ctx)
        for k, value in enumerate(ladder):
            assert close(value, bessel_k(ctx.mp.mpf("2.3") + k, 3, ctx), 1e-60)

    def test_even_in_order(self, ctx):
        assert bessel_k("-0.7", 1, ctx) == bessel_k("0.7", 1, ctx)

    def test_nonpositive_argument(self, ctx):
        with pytest.raises(DomainError):
            bessel_k(1, 0, ctx)
        with pytest.raises(DomainError):
            bessel_k_halfint(-1, 1, ctx)

    def test_empty_sequence(self, ctx):
        assert bessel_k_sequence(1, 0, 1, ctx) == []


class TestHankelD0:
    """Test the gamma-product and Barnes-G forms of D_n(0)"""

    def test_small_cases(self, ctx):
        mp = ctx.mp
        alpha = mp.mpf("0.5")
        assert laguerre_hankel_d0(0, alpha, ctx) == 1
        assert close(laguerre_hankel_d0(1, alpha, ctx), mp.gamma(alpha + 1))
        # D_2(0) = 1! Gamma(a+1) Gamma(a+2)
        assert close(laguerre_hankel_d0(2, alpha, ctx), mp.gamma(alpha + 1) * mp.gamma(alpha + 2))

    @pytest.mark.parametrize("alpha", ["0.5", "1.3"])
    def test_barnes_g_agrees(self, ctx, alpha):
        for n in range(11):
            assert close(laguerre_hankel_d0(n, alpha, ctx), barnes_g_ratio(n, alpha, ctx), 1e-20)

    def test_rejects_bad_input(self, ctx):
        with pytest.raises(DomainError):
            log_hankel_d0(-1, 1, ctx)
        with pytest.raises(DomainError):
            log_hankel_d0(2, 0, ctx)


class TestPrecisionDoubling:
    """Test that recomputing at twice the bits stays within the lower precision's targets"""

    @pytest.mark.parametrize("nu,x", [("0.3", "0.5"), ("1.7", "2"), ("4.3", "3.1")])
    def test_bessel_k(self, nu, x):
        low, high = PrecisionContext(bits=128), PrecisionContext(bits=256)
        a, b = bessel_k(nu, x, low), bessel_k(nu, x, high)
        assert abs(high.mp.mpf(a) - b) / b <= low.quad_tolerance

    def test_log_hankel_d0(self):
        low, high = PrecisionContext(bits=128), PrecisionContext(bits=256)
        a, b = log_hankel_d0(8, "0.3", low), log_hankel_d0(8, "0.3", high)
        assert abs(high.mp.mpf(a) - b) / abs(b) <= high.mp.ldexp(1, 8 - 128)
