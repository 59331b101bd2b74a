"""Settings for meandim package."""

from functools import lru_cache

from pydantic import SecretStr
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings for meandim package.

    Every field can be overridden from the environment with the `MEANDIM_`
    prefix, e.g. `MEANDIM_MAX_BALL_ELEMENTS=1000000`.
    """

    SENTRY_DSN: SecretStr = SecretStr("")
    LOG_LEVEL: str = "WARNING"

    MAX_BALL_ELEMENTS: int = 10_000_000
    MAX_SEARCH_RADIUS: int = 512
    MAX_WINDOW_CELLS: int = 64
    FLOW_CELL_LIMIT: int = 1000
    BA_MAX_STATES: int = 4096
    BA_TOLERANCE: float = 1e-8
    TOLERANCE: float = 1e-9
    RD_BRACKET_WIDTH: float = 0.2
    TAIL_FRACTION: float = 0.5
    MASS_HORIZON: int = 16
    SEED: int = 0
    JOBS: int = 1

    model_config = SettingsConfigDict(
        env_prefix="MEANDIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings():
    """Returns settings object."""
    return Settings()
