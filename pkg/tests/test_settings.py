"""Tests for environment-driven settings and logging setup."""

import io
import json
import sys

import pytest
import structlog
from pydantic import ValidationError

from singular_lue.config import Settings, get_settings
from singular_lue.observability import configure_logging


class TestSettings:
    """Test defaults and SINGULAR_LUE_ overrides"""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("SINGULAR_LUE_PREC_BITS", raising=False)
        settings = Settings(_env_file=None)
        assert settings.prec_bits == 256
        assert settings.tol is None
        assert settings.mc_seed == 20090129
        assert settings.log_format == "console"

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("SINGULAR_LUE_PREC_BITS", "512")
        monkeypatch.setenv("SINGULAR_LUE_TOL", "1e-30")
        monkeypatch.setenv("SINGULAR_LUE_LOG_FORMAT", "json")
        settings = get_settings()
        assert settings.prec_bits == 512
        assert settings.tol == 1e-30
        assert settings.log_format == "json"

    def test_cached(self):
        assert get_settings() is get_settings()

    def test_rejects_low_precision(self, monkeypatch):
        monkeypatch.setenv("SINGULAR_LUE_PREC_BITS", "32")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)


class TestLogging:
    """Test structlog configuration"""

    def test_json_events_on_stderr(self, capsys):
        configure_logging("INFO", "json")
        structlog.get_logger("test").info("run.start", command="mgf")
        captured = capsys.readouterr()
        assert captured.out == ""
        event = json.loads(captured.err.strip().splitlines()[-1])
        assert event["event"] == "run.start"
        assert event["command"] == "mgf"
        assert event["level"] == "info"

    def test_level_filtering(self, capsys):
        configure_logging("WARNING", "console")
        logger = structlog.get_logger("test")
        logger.info("hidden")
        logger.warning("shown")
        err = capsys.readouterr().err
        assert "shown" in err and "hidden" not in err

    def test_unknown_level_falls_back(self, capsys):
        configure_logging("chatty", "console")
        structlog.get_logger("test").info("visible")
        assert "visible" in capsys.readouterr().err

    def test_follows_replaced_stderr(self, monkeypatch):
        configure_logging("INFO", "console")
        first, second = io.StringIO(), io.StringIO()
        monkeypatch.setattr(sys, "stderr", first)
        structlog.get_logger("test").info("before")
        first.close()
        monkeypatch.setattr(sys, "stderr", second)
        structlog.get_logger("test").info("after")
        assert "after" in second.getvalue()
