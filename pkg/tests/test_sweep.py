"""Tests for the ordered worker-pool sweep."""

import time

from singular_lue.core.errors import DomainError
from singular_lue.orchestration.sweep import run_sweep


def _slow_square(x):
    time.sleep(0.01 * (5 - x))
    return x * x


def _fail_on_three(x):
    if x == 3:
        raise DomainError("three", x=x)
    return x


class TestRunSweep:
    """Test ordering and per-point error capture"""

    def test_preserves_input_order(self):
        outcomes = run_sweep([1, 2, 3, 4], _slow_square, max_workers=4)
        assert [o.result for o in outcomes] == [1, 4, 9, 16]
        assert all(o.ok for o in outcomes)

    def test_serial_path(self):
        outcomes = run_sweep([2], _slow_square, max_workers=4)
        assert outcomes[0].result == 4
        assert [o.result for o in run_sweep([1, 2], _slow_square, max_workers=1)] == [1, 4]

    def test_captures_errors(self):
        outcomes = run_sweep([1, 3, 5], _fail_on_three, max_workers=2)
        assert [o.ok for o in outcomes] == [True, False, True]
        assert isinstance(outcomes[1].error, DomainError)
        assert outcomes[1].point == 3

    def test_empty(self):
        assert run_sweep([], _slow_square) == []
