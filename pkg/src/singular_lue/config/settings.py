from functools import lru_cache
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support"""

    model_config = SettingsConfigDict(
        env_prefix="SINGULAR_LUE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Precision
    prec_bits: int = Field(default=256, ge=64)
    tol: Optional[float] = None
    quad_max_degree: int = Field(default=10, ge=4)

    # Painleve integration
    rtol: float = Field(default=1e-12, gt=0)
    painleve_start_fraction: float = Field(default=1e-6, gt=0, lt=1)

    # Finite differences: h = s * 2**(-bits / fd_exponent_divisor)
    fd_exponent_divisor: int = Field(default=5, ge=2)

    # Monte Carlo
    mc_samples: int = Field(default=100_000, ge=1000)
    mc_seed: int = 20090129
    mc_chunk: int = Field(default=10_000, ge=1)

    # Worker pool
    max_workers: int = Field(default=4, ge=1)

    # Monitoring
    log_level: str = "INFO"
    log_format: Literal["console", "json"] = "console"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get application settings"""
    return Settings()
