"""Cloak Bust Experiment - worst-case cores without the lossy layer."""

import time
from functools import partial
from typing import Optional, Sequence

import numpy as np

from src.cloakmap import CloakSpec, PlaneWave, virtual_scatterer
from src.config import SolverConfig
from src.experiments.passive_rate import PassiveRateExperiment, check_sweep_inputs
from src.experiments.sweep import (
    DEFAULT_GRID,
    DEFAULT_POINTS,
    DEFAULT_RHO_RANGE,
    PointOutcome,
    SweepResult,
    fit_slope,
    geometric_grid,
    run_sweep,
)
from src.farnorms import make_grid, pattern_from_coefficients, sup_norm
from src.mie_solver import plane_wave_solve

EPS_SCAN = tuple(float(v) for v in np.logspace(0.0, 4.0, 20))


def worst_core_norm(spec: CloakSpec, incident: PlaneWave, eps_grid, grid_shape,
                    config: SolverConfig, rho: float) -> PointOutcome:
    """Largest far-field sup norm over lossless cores eps_a in ``eps_grid``, layer removed."""
    start = time.perf_counter()
    grid = make_grid(*grid_shape)
    best, best_eps, cutoff = -1.0, None, 0
    for eps_a in eps_grid:
        local = CloakSpec.model_validate({
            **spec.model_dump(),
            "rho": rho,
            "conducting_layer": False,
            "core": {**spec.core.model_dump(), "eps": eps_a, "sigma": 0.0},
        })
        coeffs = plane_wave_solve(virtual_scatterer(local), local.omega, incident, config, keep_interior=False)
        norm = sup_norm(pattern_from_coefficients(coeffs, local.omega, grid))
        if norm > best:
            best, best_eps, cutoff = norm, eps_a, coeffs.N
    return PointOutcome(value=rho, norm=best, cutoff=cutoff, seconds=time.perf_counter() - start,
                        kind="plane-wave", extra={"eps_a": best_eps})


class CloakBustExperiment:
    """
    Shows that without the conducting layer the near-cloak is not uniform.

    The layered control is the passive sweep of the same template; its
    slope decides pass/fail. The bust run scans lossless high-contrast
    cores per rho and reports the worst norms. It is a demonstration.
    """

    NAME = "cloak-bust"
    DESCRIPTION = "worst-case cores with the conducting layer removed, against the layered control"

    @staticmethod
    def run(
        spec: CloakSpec,
        rho_list: Optional[Sequence[float]] = None,
        incident: Optional[PlaneWave] = None,
        eps_grid: Sequence[float] = EPS_SCAN,
        grid_shape: tuple[int, int] = DEFAULT_GRID,
        threads: int = 1,
        tolerance: Optional[float] = None,
        config: Optional[SolverConfig] = None,
        tracker=None,
    ) -> SweepResult:
        """
        Run the control sweep and the unlayered worst-case scan.

        Returns:
            The control SweepResult, with ``details`` holding control_slope,
            bust_slope, bust_norms, bust_eps and whether the bust norms are
            monotone in rho
        """
        cfg = config or SolverConfig()
        rhos = list(rho_list) if rho_list is not None else geometric_grid(*DEFAULT_RHO_RANGE, DEFAULT_POINTS)
        check_sweep_inputs(spec, rhos, cfg)
        incident = incident or PlaneWave()

        control = PassiveRateExperiment.run(spec, rhos, incident, grid_shape, threads, tolerance, cfg, tracker)

        task = partial(worst_core_norm, spec, incident, tuple(float(e) for e in eps_grid), tuple(grid_shape), cfg)
        outcomes = [o for o in run_sweep(rhos, task, threads, tracker) if o.norm is not None]
        bust_points = [(o.value, o.norm) for o in outcomes if o.norm > 0]
        bust_slope = fit_slope(bust_points)[0] if len(bust_points) >= 4 else None
        norms = [o.norm for o in outcomes]
        monotone = all(b <= a for a, b in zip(norms, norms[1:]))

        details = {
            "control_slope": control.slope,
            "bust_slope": bust_slope,
            "bust_rho": [o.value for o in outcomes],
            "bust_norms": norms,
            "bust_eps": [o.extra.get("eps_a") for o in outcomes],
            "bust_monotone": monotone,
            "busted": bool(not monotone or (bust_slope is not None and bust_slope < control.predicted - 1.0)),
        }
        return SweepResult(
            experiment=CloakBustExperiment.NAME,
            rho_values=control.rho_values,
            norms=control.norms,
            slope=control.slope,
            intercept=control.intercept,
            r_squared=control.r_squared,
            residuals=control.residuals,
            predicted=control.predicted,
            tolerance=control.tolerance,
            failed=control.failed,
            flagged_zero=control.flagged_zero,
            details=details,
        )
