"""Property-based checks across random orders, arguments and (alpha, s) points."""

from hypothesis import given, settings, strategies as st

from singular_lue.core.ladder import aux_from_moments, hierarchy_iterate, verify_residue_identities
from singular_lue.core.moments import EnsembleParams, mgf
from singular_lue.core.painleve import sigma_data, sigma_form_terms
from singular_lue.core.precision import PrecisionContext
from singular_lue.core.specialfun import bessel_k

alphas = st.integers(min_value=2, max_value=30).map(lambda k: str(k / 10))
positive_s = st.integers(min_value=1, max_value=50).map(lambda k: str(k / 10))
sizes = st.integers(min_value=1, max_value=4)
orders = st.integers(min_value=10, max_value=40).map(lambda k: str(k / 10))
arguments = st.integers(min_value=5, max_value=80).map(lambda k: str(k / 10))

fast = settings(max_examples=15, deadline=None)


def _params(alpha, s):
    return EnsembleParams(alpha=alpha, s=s, ctx=PrecisionContext(bits=192))


class TestBesselProperties:
    """Test the order recurrence and monotonicity of K_nu"""

    @fast
    @given(nu=orders, x=arguments)
    def test_recurrence_in_order(self, nu, x):
        ctx = PrecisionContext(bits=192)
        mp = ctx.mp
        nu_mp, x_mp = mp.mpf(nu), mp.mpf(x)
        lower, mid, upper = (bessel_k(nu_mp + k, x_mp, ctx) for k in (-1, 0, 1))
        assert abs(upper - lower - 2 * nu_mp / x_mp * mid) <= 1e-40 * upper

    @fast
    @given(nu=orders, x=arguments)
    def test_positive_and_decreasing_in_x(self, nu, x):
        ctx = PrecisionContext(bits=192)
        mp = ctx.mp
        here = bessel_k(nu, x, ctx)
        assert here > 0
        assert bessel_k(nu, mp.mpf(x) * mp.mpf("1.1"), ctx) < here


class TestDeterminantProperties:
    """Test bounds and monotonicity of the moment generating function"""

    @fast
    @given(alpha=alphas, s=positive_s, n=sizes)
    def test_mgf_in_unit_interval(self, alpha, s, n):
        value = mgf(n, _params(alpha, s))
        assert 0 < value < 1

    @fast
    @given(alpha=alphas, s=positive_s, n=sizes)
    def test_mgf_decreasing_in_s(self, alpha, s, n):
        params = _params(alpha, s)
        assert mgf(n, params.with_s(params.s_mp * 2)) < mgf(n, params)


class TestAuxiliaryProperties:
    """Test agreement between the independent routes to a_n, b_n"""

    @fast
    @given(alpha=alphas, s=positive_s)
    def test_hierarchy_matches_moments(self, alpha, s):
        params = _params(alpha, s)
        direct = aux_from_moments(3, params)
        ladder = hierarchy_iterate(3, params)
        for n in range(4):
            assert direct.a[n] > 0
            assert abs(direct.a[n] - ladder.a[n]) / direct.a[n] < 1e-20
            assert abs(direct.b[n] - ladder.b[n]) <= 1e-20 * max(abs(direct.b[n]), 1)

    @fast
    @given(alpha=alphas, s=positive_s)
    def test_residue_identities(self, alpha, s):
        report = verify_residue_identities(3, _params(alpha, s))
        assert report.passed, report.failures

    @fast
    @given(alpha=alphas, s=positive_s, n=sizes)
    def test_sigma_form(self, alpha, s, n):
        params = _params(alpha, s)
        lhs, square, product = sigma_form_terms(sigma_data(n, params), params)
        assert abs(lhs - (square - product)) <= 1e-20 * max(abs(lhs), abs(square), 1)
