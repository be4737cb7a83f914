import math
from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Project
    PROJECT_NAME: str = "kktower"

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    LOG_JSON: bool = Field(default=False)

    # Parallel kernel construction (rows of the kernel matrices are independent)
    THREADS: int = Field(default=1, ge=1)

    # Quadrature
    NODES_PER_PANEL: int = Field(default=16, ge=2, le=64)
    MAX_PANEL_WIDTH: float = Field(default=0.5, gt=0)
    # Mean GL node spacing in m, as a fraction of pi / (2 (Z_max + T))
    SPECTRAL_SPACING_FACTOR: float = Field(default=0.5, gt=0, le=1)

    # Root finding
    ROOT_SCAN_STEP: float = Field(default=math.pi / 8, gt=0)
    ROOT_MAX_SCAN: int = Field(default=100_000, ge=10)

    # Budgets and tolerances
    TAIL_BUDGET: float = Field(default=1e-6, gt=0)
    ROUNDTRIP_TOLERANCE: float = Field(default=1e-6, gt=0)
    CONSERVATION_TOLERANCE: float = Field(default=1e-6, gt=0)
    DECAY_MIN_R2: float = Field(default=0.98, gt=0, le=1)

    # Branch of alpha used by the grid-side energy
    ENERGY_ALPHA_BRANCH: Literal["plus", "minus"] = Field(default="minus")

    # Output
    OUTPUT_DIR: str = Field(default="runs")

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        return v.upper()

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    return Settings()
