#!/usr/bin/env python3
"""Basic health check for setup verification"""

import math
import sys
from pathlib import Path


def check_project_structure():
    """Verify project structure is correct"""
    required_dirs = [
        "src/singular_lue/core",
        "src/singular_lue/cli",
        "tests",
        "requirements",
    ]

    missing = [d for d in required_dirs if not Path(d).exists()]
    if missing:
        print("❌ Missing directories:")
        for d in missing:
            print(f"   - {d}")
        return False

    print("✅ Project structure is correct")
    return True


def check_dependencies():
    """Check key dependencies are installed"""
    try:
        import mpmath  # noqa: F401
        import pandas  # noqa: F401
        import pydantic_settings  # noqa: F401
        import scipy  # noqa: F401
        import structlog  # noqa: F401

        print("✅ Core dependencies available")
        return True
    except ImportError as e:
        print(f"❌ Dependency issue: {e}")
        return False


def check_settings():
    """Load settings from the environment and optional .env file"""
    try:
        from singular_lue.config import get_settings

        settings = get_settings()
    except Exception as e:
        print(f"❌ Settings failed to load: {e}")
        return False

    print(f"✅ Settings loaded (prec_bits={settings.prec_bits})")
    return True


def check_known_value():
    """M_1(1) at alpha = 1/2 is 3 exp(-2)"""
    try:
        from singular_lue.core.moments import EnsembleParams, mgf

        value = float(mgf(1, EnsembleParams(alpha="0.5", s=1)))
    except Exception as e:
        print(f"❌ Determinant route failed: {e}")
        return False

    if abs(value - 3 * math.exp(-2)) > 1e-14:
        print(f"❌ M_1(1) = {value}, expected {3 * math.exp(-2)}")
        return False

    print("✅ Determinant route reproduces 3 exp(-2)")
    return True


def main():
    print("🔍 Health Check")
    print("=" * 30)

    checks = [
        check_project_structure(),
        check_dependencies(),
        check_settings(),
        check_known_value(),
    ]

    if all(checks):
        print("\n🎉 Setup is healthy!")
    else:
        print("\n❌ Setup issues found")
        print("Please review and fix before running sweeps")
        sys.exit(1)


if __name__ == "__main__":
    main()
