"""Active Rate Experiment - far-field decay for currents hidden in the core or the layer."""

import time
from functools import partial
from typing import Optional, Sequence

from src.cloakmap import (
    CloakSpec,
    predicted_rates,
    validate_source,
    virtual_scatterer,
    virtual_source,
)
from src.config import RateCalculator, SolverConfig
from src.exceptions import ConfigurationError
from src.experiments.passive_rate import check_sweep_inputs
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
from src.mie_solver import current_n1_solve


def active_norm(spec: CloakSpec, src, grid_shape, config: SolverConfig, rho: float) -> PointOutcome:
    """Sup norm of the far field radiated by a physical-space current at one regularizer."""
    start = time.perf_counter()
    local = spec.with_rho(rho)
    coeffs = current_n1_solve(virtual_scatterer(local), local.omega, virtual_source(local, src), config)
    pattern = pattern_from_coefficients(coeffs, local.omega, make_grid(*grid_shape))
    return PointOutcome(value=rho, norm=sup_norm(pattern), cutoff=coeffs.N,
                        seconds=time.perf_counter() - start, kind="current")


class ActiveRateExperiment:
    """
    Sweeps rho for a constant current inside the cloaked region.

    Core currents are compared against zeta1 / 2 and need a conducting
    core; shell currents are compared against zeta2.
    """

    NAME = "active"
    DESCRIPTION = "far-field decay of a current source hidden by the cloak"

    @staticmethod
    def predicted(spec: CloakSpec, src) -> float:
        rates = predicted_rates(spec.exponents)
        if src.kind == "core-current":
            return float(rates.active_core)
        if src.kind == "shell-current":
            return float(rates.active_shell)
        raise ConfigurationError(f"active sweeps need a current source, got '{src.kind}'")

    @staticmethod
    def run(
        spec: CloakSpec,
        src,
        rho_list: Optional[Sequence[float]] = None,
        grid_shape: tuple[int, int] = DEFAULT_GRID,
        threads: int = 1,
        tolerance: Optional[float] = None,
        config: Optional[SolverConfig] = None,
        tracker=None,
    ) -> SweepResult:
        """
        Run the active sweep.

        Raises:
            TheoremPreconditionError: core current without core conductivity
            ConfigurationError: source outside its region or invalid exponents
        """
        cfg = config or SolverConfig()
        rhos = list(rho_list) if rho_list is not None else geometric_grid(*DEFAULT_RHO_RANGE, DEFAULT_POINTS)
        predicted = ActiveRateExperiment.predicted(spec, src)
        validate_source(spec, src)
        check_sweep_inputs(spec, rhos, cfg)
        tol = RateCalculator.CLOAK_TOLERANCE if tolerance is None else tolerance

        task = partial(active_norm, spec, src, tuple(grid_shape), cfg)
        outcomes = run_sweep(rhos, task, threads, tracker)
        return summarize(ActiveRateExperiment.NAME, outcomes, predicted, tol,
                         details={"source": src.kind})
