"""Runtime configuration and acceptance-threshold helpers."""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field


class SolverConfig(BaseModel):
    """
    Numerical settings shared by the solver and the sweep driver.

    Values come from defaults, then the environment (a ``.env`` file is
    honoured through python-dotenv), then explicit overrides.
    """

    n_max: int = Field(200, ge=4, description="Largest multipole order allowed")
    im_safe_band: float = Field(600.0, gt=0, description="Largest |Im z| evaluated unscaled")
    rho_min: float = Field(1e-3, gt=0, lt=1, description="Smallest admissible regularizer")
    tail_tolerance: float = Field(1e-14, gt=0)
    passivity_tolerance: float = Field(1e-9, ge=0)
    energy_rtol: float = Field(1e-10, gt=0)
    threads: int = Field(1, ge=0, description="Worker processes for sweeps, 0 = all cores")

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """
        Build a configuration from CLOAKBENCH_* environment variables.

        Args:
            **overrides: Explicit values taking precedence over the environment

        Returns:
            Validated SolverConfig
        """
        load_dotenv()

        values = {}
        env_map = {
            'n_max': ('CLOAKBENCH_N_MAX', int),
            'im_safe_band': ('CLOAKBENCH_IM_SAFE_BAND', float),
            'rho_min': ('CLOAKBENCH_RHO_MIN', float),
            'threads': ('CLOAKBENCH_THREADS', int),
        }
        for field_name, (env_name, cast) in env_map.items():
            raw = os.getenv(env_name)
            if raw not in (None, ""):
                values[field_name] = cast(raw)

        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def resolved_threads(self) -> int:
        """Number of workers to use; 0 means every available core."""
        if self.threads == 0:
            return os.cpu_count() or 1
        return self.threads


class RateCalculator:
    """Acceptance arithmetic for rate sweeps."""

    CLOAK_TOLERANCE = 0.3
    INCLUSION_TOLERANCE = 0.2

    @staticmethod
    def threshold(predicted: float, tolerance: Optional[float] = None) -> float:
        """
        Smallest fitted slope that still passes.

        The decay estimates are upper bounds on the amplitude, so a sweep
        passes when the observed slope is at least the prediction minus a
        pre-asymptotic allowance.

        Args:
            predicted: Predicted decay exponent
            tolerance: Allowance; defaults to the cloak-sweep tolerance

        Returns:
            predicted - tolerance
        """
        if tolerance is None:
            tolerance = RateCalculator.CLOAK_TOLERANCE
        return float(predicted) - float(tolerance)

    @staticmethod
    def passes(slope: float, predicted: float, tolerance: Optional[float] = None) -> bool:
        """Whether a fitted slope meets the bound."""
        return float(slope) >= RateCalculator.threshold(predicted, tolerance)
