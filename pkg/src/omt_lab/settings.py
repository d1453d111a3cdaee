"""
Settings management for omt-lab using pydantic-settings.

This module provides centralized defaults for every numeric knob of the
laboratory. Command-line flags override these values; whatever is resolved
is echoed in the output document, so no parameter stays hidden.

Environment Variables (all optional, prefix OMT_LAB_):
- OMT_LAB_STEP_SCALE
- OMT_LAB_BOUNDARY_TOL
- OMT_LAB_MAX_STEPS
- OMT_LAB_MARGIN_TOL
- OMT_LAB_CIRCLE_SAMPLES
- OMT_LAB_GAMMA_SAMPLES
- OMT_LAB_IMAGE_STEPS
- OMT_LAB_THREADS
- OMT_LAB_LOG_LEVEL
"""

import os
from typing import Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    """omt-lab defaults with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="OMT_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # Sampler
    step_scale: float = Field(
        default=1e-4,
        gt=0,
        description="Time step as a fraction of r^2 (step_dt = step_scale * r^2)"
    )

    boundary_tol: float = Field(
        default=1e-9,
        gt=0,
        description="Tolerance for exit points lying on the stopping circle"
    )

    max_steps: int = Field(
        default=1_000_000,
        gt=0,
        description="Step budget of a single sampled path"
    )

    # Analytic functions and the gamma curve
    margin_tol: float = Field(
        default=1e-6,
        gt=0,
        description="Smallest margin m accepted by radius selection"
    )

    circle_samples: int = Field(
        default=1024,
        ge=64,
        description="Circle points used by min_on_circle"
    )

    gamma_samples: int = Field(
        default=1024,
        ge=256,
        description="Points of the discretized gamma curve"
    )

    max_halvings: int = Field(
        default=60,
        gt=0,
        description="Radius halvings before radius selection gives up"
    )

    # Time change
    image_steps: int = Field(
        default=4096,
        gt=0,
        description="Image grid intervals per path (image_step = sigma_end / image_steps)"
    )

    # Experiment and statistics
    cell_fraction: float = Field(
        default=0.95,
        gt=0,
        le=1,
        description="Only grid cells inside D(v, cell_fraction * m) are counted"
    )

    grid_cells: int = Field(
        default=10,
        gt=0,
        description="Coverage grid cells per axis"
    )

    significance: float = Field(
        default=1e-3,
        gt=0,
        lt=1,
        description="Significance level of the chi-square verdicts"
    )

    uniformity_bins: int = Field(
        default=36,
        ge=8,
        description="Bins of the exit-angle uniformity test"
    )

    invariance_bins: int = Field(
        default=24,
        ge=8,
        description="Bins of the two-sample crossing-angle test"
    )

    # Runtime
    threads: Optional[int] = Field(
        default=None,
        description="Worker threads for path sampling (None = machine parallelism)"
    )

    dump_paths_cap: int = Field(
        default=8,
        ge=0,
        description="Maximum number of paths written by --dump-paths"
    )

    log_level: str = Field(
        default="WARNING",
        description="Logging level for stderr output"
    )

    @field_validator("threads")
    @classmethod
    def _positive_threads(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("threads must be at least 1")
        return value

    @property
    def worker_threads(self) -> int:
        """Get thread count with fallback to machine parallelism."""
        return self.threads or os.cpu_count() or 1

    def step_dt(self, radius: float) -> float:
        """Scale-aware default time step for paths stopped at `radius`."""
        return self.step_scale * radius * radius


# Global settings instance
_settings: Optional[LabSettings] = None


def get_settings() -> LabSettings:
    """
    Get the global settings instance (singleton pattern).

    Returns:
        LabSettings instance
    """
    global _settings
    if _settings is None:
        _settings = LabSettings()
    return _settings


def reload_settings() -> LabSettings:
    """
    Reload settings from environment (useful for testing).

    Returns:
        Newly loaded LabSettings instance
    """
    global _settings
    _settings = LabSettings()
    return _settings
