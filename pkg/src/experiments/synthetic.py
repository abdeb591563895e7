"""Synthetic Power Law - exercises the sweep pipeline without any solve."""

from functools import partial
from typing import Optional, Sequence

from src.config import RateCalculator
from src.experiments.sweep import (
    DEFAULT_POINTS,
    DEFAULT_RHO_RANGE,
    PointOutcome,
    SweepResult,
    geometric_grid,
    run_sweep,
    summarize,
)

AMPLITUDE = 7.0


def power_law_norm(power: float, rho: float) -> PointOutcome:
    return PointOutcome(value=rho, norm=AMPLITUDE * rho ** power, kind="synthetic")


class SyntheticPowerLaw:
    """Norms 7 rho^p; the fitted slope must come back as p."""

    NAME = "selftest-powerlaw"
    DESCRIPTION = "synthetic power law through the full sweep and report path"

    @staticmethod
    def run(
        power: float,
        rho_list: Optional[Sequence[float]] = None,
        threads: int = 1,
        tolerance: Optional[float] = None,
        tracker=None,
    ) -> SweepResult:
        rhos = list(rho_list) if rho_list is not None else geometric_grid(*DEFAULT_RHO_RANGE, DEFAULT_POINTS)
        tol = RateCalculator.CLOAK_TOLERANCE if tolerance is None else tolerance
        outcomes = run_sweep(rhos, partial(power_law_norm, float(power)), threads, tracker)
        return summarize(SyntheticPowerLaw.NAME, outcomes, float(power), tol)
