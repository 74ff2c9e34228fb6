"""Process-level settings loaded from the environment.

These are the knobs that change how an experiment is executed and logged,
not what is computed: log level and format, replicate parallelism,
continuous invariant checking and output retry policy. Everything that
influences results lives in the experiment configuration file
(see ``cell_tracker.config.experiment``).

Example:
    Load settings from environment::

        from cell_tracker.config import get_settings

        settings = get_settings()
        workers = settings.MAX_WORKERS

    Create custom settings for testing::

        from cell_tracker.config import Settings

        test_settings = Settings(ENV="test", CHECK_INVARIANTS=True, MAX_WORKERS=1)
"""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from environment variables and an optional ``.env`` file.

    Attributes:
        ENV: Environment name (local/dev/ci/test).
        LOG_LEVEL: Logging level (DEBUG/INFO/WARNING/ERROR/CRITICAL).
        LOG_FORMAT: Log format (json/standard).
        MAX_WORKERS: Maximum number of replicates executed concurrently.
            Results do not depend on this value.
        CHECK_INVARIANTS: Assert existence-probability ranges, pdf
            normalization and recycling mass conservation after every step.
        OUTPUT_DIR: Default experiment output directory.
        IO_RETRY_ATTEMPTS: Attempts for writing an output file before failing.

    Note:
        Settings are cached using lru_cache in get_settings().
        Use Settings() directly only for testing with custom values.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    ENV: Literal["local", "dev", "ci", "test"] = "local"

    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    LOG_FORMAT: Literal["json", "standard"] = "standard"

    MAX_WORKERS: int = Field(default=4, ge=1, description="Concurrent replicates")
    CHECK_INVARIANTS: bool = True

    OUTPUT_DIR: str = "out/experiments"
    IO_RETRY_ATTEMPTS: int = Field(default=3, ge=1)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance (singleton pattern)."""
    return Settings()


def clear_settings_cache() -> None:
    """Clear the settings cache so the next get_settings() reloads the environment."""
    get_settings.cache_clear()
