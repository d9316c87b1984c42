"""
tnnflag Configuration
=====================
Centralized settings for sweeps, sampling, loop-group windows, logging and
the HTTP surface. Every value can be overridden through the environment or
a `.env` file.
"""

from typing import List
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from functools import lru_cache

from tnnflag import __version__


class Settings(BaseSettings):
    """
    Application settings with environment variable support. Fields read the
    variable of the same name (APP_NAME, API_MAX_N, LOG_LEVEL, ...); sweep
    settings use the TNNFLAG_ prefix.

    Example: TNNFLAG_SEED=7 TNNFLAG_JOBS=4 python -m tnnflag verify conjecture
    """

    # ===========================================
    # APPLICATION SETTINGS
    # ===========================================
    app_name: str = Field(default="tnnflag")
    app_version: str = Field(default=__version__)
    debug: bool = Field(default=False)
    environment: str = Field(default="development")  # development, ci, production

    # ===========================================
    # SWEEP SETTINGS
    # ===========================================
    seed: int = Field(default=0, validation_alias="TNNFLAG_SEED")
    jobs: int = Field(default=1, ge=1, validation_alias="TNNFLAG_JOBS")
    budget_seconds: float = Field(default=0.0, ge=0.0, validation_alias="TNNFLAG_BUDGET_SECONDS")  # 0 = unlimited
    nmax: int = Field(default=4, ge=1, validation_alias="TNNFLAG_NMAX")
    nmax_limit: int = Field(default=6, ge=1, validation_alias="TNNFLAG_NMAX_LIMIT")

    # ===========================================
    # SAMPLING SETTINGS
    # ===========================================
    sample_points: int = Field(default=32, ge=1, validation_alias="TNNFLAG_SAMPLE_POINTS")
    random_points: int = Field(default=5, ge=1, validation_alias="TNNFLAG_RANDOM_POINTS")

    # ===========================================
    # LOOP GROUP SETTINGS
    # ===========================================
    window_padding: int = Field(default=2, ge=1, validation_alias="TNNFLAG_WINDOW_PADDING")

    # ===========================================
    # API SETTINGS
    # ===========================================
    api_prefix: str = Field(default="/api/v1")
    api_host: str = Field(default="0.0.0.0")
    api_port: int = Field(default=8000)
    workers: int = Field(default=1)
    api_max_n: int = Field(default=5, ge=2)

    # ===========================================
    # CORS SETTINGS
    # ===========================================
    cors_origins: List[str] = Field(default=["*"])
    cors_allow_methods: List[str] = Field(default=["GET"])
    cors_allow_headers: List[str] = Field(default=["*"])

    # ===========================================
    # LOGGING SETTINGS
    # ===========================================
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="text")  # json or text

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )


@lru_cache()
def get_settings() -> Settings:
    """Settings are loaded once per process."""
    return Settings()


settings = get_settings()
