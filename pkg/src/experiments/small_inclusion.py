"""Small Inclusion Experiment - radiation from a prescribed trace on a shrinking sphere."""

import time
from functools import partial
from typing import Literal, Optional, Sequence

import numpy as np

from src.cloakmap import PlaneWave, TangentialTrace
from src.config import RateCalculator, SolverConfig
from src.exceptions import ConfigurationError
from src.experiments.sweep import (
    DEFAULT_GRID,
    DEFAULT_POINTS,
    DEFAULT_TAU_RANGE,
    PointOutcome,
    SweepResult,
    geometric_grid,
    run_sweep,
    summarize,
)
from src.farnorms import make_grid, pattern_from_coefficients, sup_norm
from src.mie_solver import exterior_trace_solve, incident_trace

TraceMode = Literal["fixed-profile", "incident-trace"]

TAU_CEILING = 0.3
PREDICTED = {"fixed-profile": 2.0, "incident-trace": 3.0}


def fixed_profile(orders: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """te_n = tm_n = 1/n for n = 1..orders."""
    n = np.arange(1, orders + 1)
    return 1.0 / n, 1.0 / n


def trace_norm(mode: str, omega: float, incident: Optional[PlaneWave], profile, grid_shape,
               config: SolverConfig, tau: float) -> PointOutcome:
    start = time.perf_counter()
    if mode == "incident-trace":
        trace = incident_trace(tau, omega, incident, config)
    else:
        te, tm = profile
        trace = TangentialTrace.from_complex(tau, te, tm)
    coeffs = exterior_trace_solve(tau, omega, trace, config)
    pattern = pattern_from_coefficients(coeffs, omega, make_grid(*grid_shape))
    return PointOutcome(value=tau, norm=sup_norm(pattern), cutoff=coeffs.N,
                        seconds=time.perf_counter() - start, kind="trace")


class SmallInclusionExperiment:
    """
    Sweeps the radius tau of a sphere carrying a tangential electric trace.

    A trace profile held fixed in tau radiates like tau^2; the trace of an
    incident plane wave (a tangential-E-matched sphere) radiates like tau^3.
    """

    NAME = "small-inclusion"
    DESCRIPTION = "far-field decay of a shrinking sphere with a prescribed trace"

    @staticmethod
    def run(
        mode: TraceMode = "fixed-profile",
        tau_list: Optional[Sequence[float]] = None,
        omega: float = 1.0,
        incident: Optional[PlaneWave] = None,
        profile: Optional[tuple] = None,
        grid_shape: tuple[int, int] = DEFAULT_GRID,
        threads: int = 1,
        tolerance: Optional[float] = None,
        config: Optional[SolverConfig] = None,
        tracker=None,
    ) -> SweepResult:
        """
        Run the small-inclusion sweep.

        Args:
            mode: 'fixed-profile' or 'incident-trace'
            tau_list: Radii in (0, 0.3], default 6 geometric points from 0.3 to 0.03
            omega: Angular frequency
            incident: Plane wave for the incident-trace mode
            profile: (te, tm) coefficient arrays for the fixed-profile mode

        Returns:
            SweepResult with predicted 2 (fixed profile) or 3 (incident trace)
        """
        if mode not in PREDICTED:
            raise ConfigurationError(f"unknown trace mode '{mode}', expected one of {sorted(PREDICTED)}")
        cfg = config or SolverConfig()
        taus = list(tau_list) if tau_list is not None else geometric_grid(*DEFAULT_TAU_RANGE, DEFAULT_POINTS)
        for tau in taus:
            if not 0.0 < tau <= TAU_CEILING:
                raise ConfigurationError(f"tau = {tau} outside (0, {TAU_CEILING}]")
        tol = RateCalculator.INCLUSION_TOLERANCE if tolerance is None else tolerance
        incident = incident or PlaneWave()
        profile = profile if profile is not None else fixed_profile()

        task = partial(trace_norm, mode, omega, incident, profile, tuple(grid_shape), cfg)
        outcomes = run_sweep(taus, task, threads, tracker)
        return summarize(SmallInclusionExperiment.NAME, outcomes, PREDICTED[mode], tol,
                         details={"mode": mode})
