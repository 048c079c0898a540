from __future__ import annotations
from functools import lru_cache
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    """
    Verifier settings.
    """
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="allow")

    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    winding_max_depth: int = Field(default=20, alias="WINDING_MAX_DEPTH")
    winding_samples_per_subsector: int = Field(default=64, alias="WINDING_SAMPLES_PER_SUBSECTOR")
    radial_clamp: float = Field(default=50.0, alias="RADIAL_CLAMP")
    n_jobs: int = Field(default=1, alias="N_JOBS")
    seed: int = Field(default=0, alias="SEED")

    separation_floor: float = Field(default=1e-12, alias="SEPARATION_FLOOR")
    separation_window: int = Field(default=8, alias="SEPARATION_WINDOW")

    escape_samples: int = Field(default=1000, alias="ESCAPE_SAMPLES")
    escape_steps: int = Field(default=50, alias="ESCAPE_STEPS")
    escape_band: float = Field(default=5.0, alias="ESCAPE_BAND")
    escape_return_tol: float = Field(default=1e-9, alias="ESCAPE_RETURN_TOL")
    escape_min_fraction: float = Field(default=0.99, alias="ESCAPE_MIN_FRACTION")

    reports_dir: str = Field(default="artifacts/reports", alias="REPORTS_DIR")

@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
