"""Shared fixtures.

Most exact values below come from alpha = 1/2, s = 1, where every Bessel
function is elementary: a_0 = 2/3, b_1 = -4/9, beta_1 = 31/18, a_1 = 52/93.
"""

import pytest
import structlog

from singular_lue.config import get_settings
from singular_lue.core.ladder import aux_from_moments
from singular_lue.core.moments import EnsembleParams
from singular_lue.core.precision import PrecisionContext


@pytest.fixture
def ctx():
    return PrecisionContext(bits=256)


@pytest.fixture
def low_ctx():
    return PrecisionContext(bits=128)


@pytest.fixture
def half(ctx):
    """alpha = 1/2, s = 1."""
    return EnsembleParams(alpha="0.5", s=1, ctx=ctx)


@pytest.fixture
def generic(ctx):
    """alpha = 1.3, s = 2."""
    return EnsembleParams(alpha="1.3", s=2, ctx=ctx)


@pytest.fixture
def laguerre(ctx):
    return EnsembleParams(alpha="0.5", s=0, ctx=ctx)


@pytest.fixture(scope="session")
def half_aux():
    """Moments-route a_n, b_n for n <= 3 at alpha = 1/2, s = 1, built once."""
    return aux_from_moments(3, EnsembleParams(alpha="0.5", s=1, ctx=PrecisionContext(bits=256)))


@pytest.fixture
def rat(ctx):
    """Exact rationals at the working precision."""

    def make(p, q=1):
        return ctx.mp.mpf(p) / q

    return make


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(autouse=True)
def _fresh_logging():
    yield
    structlog.reset_defaults()


def close(x, y, tol=1e-40):
    scale = max(abs(x), abs(y), 1e-300)
    return abs(x - y) / scale <= tol
