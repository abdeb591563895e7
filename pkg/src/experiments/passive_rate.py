"""Passive Rate Experiment - far-field decay of the cloak under plane-wave incidence."""

import time
from functools import partial
from typing import Optional, Sequence

from src.cloakmap import CloakSpec, PlaneWave, predicted_rates, virtual_scatterer
from src.config import RateCalculator, SolverConfig
from src.exceptions import ConfigurationError
from src.experiments.sweep import (
    DEFAULT_GRID,
    DEFAULT_POINTS,
    DEFAULT_RHO_RANGE,
    PointOutcome,
    SweepResult,
    geometric_grid,
    run_sweep,
    summarize,
)
from src.farnorms import make_grid, pattern_from_coefficients, sup_norm
from src.mie_solver import plane_wave_solve

RHO_CEILING = 0.2


def check_sweep_inputs(spec: CloakSpec, rho_list: Sequence[float], config: SolverConfig) -> None:
    """Reject invalid exponents and regularizers outside [rho_min, 0.2]."""
    exps = spec.exponents
    if not exps.valid:
        raise ConfigurationError(f"invalid exponents (r, s, t) = ({spec.r}, {spec.s}, {spec.t}): zeta1 = {exps.zeta1} <= 0")
    for rho in rho_list:
        if not config.rho_min <= rho <= RHO_CEILING:
            raise ConfigurationError(f"rho = {rho} outside [{config.rho_min}, {RHO_CEILING}]")


def passive_norm(spec: CloakSpec, incident: PlaneWave, grid_shape, config: SolverConfig, rho: float) -> PointOutcome:
    """Sup norm of the far field of the cloak at one regularizer."""
    start = time.perf_counter()
    local = spec.with_rho(rho)
    coeffs = plane_wave_solve(virtual_scatterer(local), local.omega, incident, config, keep_interior=False)
    pattern = pattern_from_coefficients(coeffs, local.omega, make_grid(*grid_shape))
    return PointOutcome(value=rho, norm=sup_norm(pattern), cutoff=coeffs.N,
                        seconds=time.perf_counter() - start, kind="plane-wave")


class PassiveRateExperiment:
    """
    Sweeps rho for a plane wave on the cloak and fits the far-field decay.

    The virtual small sphere has exactly the physical far field, so each
    point is one layered-sphere solve. Predicted rate: min(zeta1, 3).
    """

    NAME = "passive"
    DESCRIPTION = "plane-wave far-field decay of the regularized cloak"

    @staticmethod
    def run(
        spec: CloakSpec,
        rho_list: Optional[Sequence[float]] = None,
        incident: Optional[PlaneWave] = None,
        grid_shape: tuple[int, int] = DEFAULT_GRID,
        threads: int = 1,
        tolerance: Optional[float] = None,
        config: Optional[SolverConfig] = None,
        tracker=None,
    ) -> SweepResult:
        """
        Run the passive sweep.

        Args:
            spec: Cloak template; its rho is replaced per point
            rho_list: Regularizers, default 6 geometric points from 0.1 to 0.01
            incident: Plane wave, default z-propagating x-polarized
            grid_shape: (n_polar, n_azimuth) of the far-field grid
            threads: Worker processes
            tolerance: Slope allowance, default 0.3
            config: Numerical settings

        Returns:
            SweepResult with predicted = min(zeta1, 3)
        """
        cfg = config or SolverConfig()
        rhos = list(rho_list) if rho_list is not None else geometric_grid(*DEFAULT_RHO_RANGE, DEFAULT_POINTS)
        check_sweep_inputs(spec, rhos, cfg)
        incident = incident or PlaneWave()
        tol = RateCalculator.CLOAK_TOLERANCE if tolerance is None else tolerance
        predicted = float(predicted_rates(spec.exponents).passive)

        task = partial(passive_norm, spec, incident, tuple(grid_shape), cfg)
        outcomes = run_sweep(rhos, task, threads, tracker)
        return summarize(PassiveRateExperiment.NAME, outcomes, predicted, tol)
