from __future__ import annotations

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=(".env",), env_prefix="NCUP_", case_sensitive=False)

    LOG_LEVEL: str = Field(default="WARNING")

    # Size bounds for brute-force combinatorics
    MAX_GROUP_ORDER: int = Field(default=24, ge=1)
    MAX_SPIN_POINTS: int = Field(default=32, ge=1)
    MAX_BRUTE_FORCE_CHARACTERS: int = Field(default=16, ge=1)

    # Hermitian eigensolver
    EIGEN_BACKEND: Literal["lapack", "jacobi"] = Field(default="lapack")
    JACOBI_TOL: float = Field(default=1e-13, gt=0.0)
    JACOBI_MAX_SWEEPS: int = Field(default=100, ge=1)

    # Numerical thresholds
    RANK_REL_TOL: float = Field(default=1e-9, gt=0.0)
    MEMBERSHIP_TOL: float = Field(default=1e-10, gt=0.0)
    TOL_EQUALITY: float = Field(default=1e-8, ge=0.0)
    TOL_INEQUALITY: float = Field(default=1e-9, ge=0.0)
    TOL_RANK: float = Field(default=1e-6, ge=0.0)

    # Harness defaults
    DEFAULT_SEED: int = Field(default=20160923, ge=0, lt=2**64)
    DEFAULT_SAMPLES: int = Field(default=200, ge=1)
    PARALLEL: int = Field(default=1, ge=1)
    COUNTEREXAMPLE_CAP: int = Field(default=10, ge=0)
    TAO_BUDGET: int = Field(default=100_000, ge=1)
    REPORT_INCLUDE_TIMING: bool = Field(default=False)
    PROGRESS: bool = Field(default=False)


settings = Settings()
