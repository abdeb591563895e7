"""Experiment Manager - routes a validated config to the solver or an experiment class."""

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.cloakmap import CURRENT_KINDS, validate_source, virtual_scatterer, virtual_source
from src.config import SolverConfig
from src.exceptions import ConfigurationError
from src.experiments import (
    ActiveRateExperiment,
    CloakBustExperiment,
    PassiveRateExperiment,
    SmallInclusionExperiment,
    SweepResult,
    SyntheticPowerLaw,
)
from src.experiments.cloak_bust import EPS_SCAN
from src.farnorms import FarFieldPattern, make_grid, pattern_from_coefficients
from src.materials import tensor_grid_frame
from src.mie_solver import (
    CrossSections,
    EnergyBalance,
    MultipoleCoefficients,
    cross_sections,
    current_n1_solve,
    energy_balance,
    exterior_trace_solve,
    plane_wave_solve,
)
from src.schemas import ExperimentConfig
from src.utils.logging_handler import SolveTracker


@dataclass(frozen=True)
class SolveOutcome:
    coeffs: MultipoleCoefficients
    pattern: FarFieldPattern
    energy: Optional[EnergyBalance] = None
    sections: Optional[CrossSections] = None


class ExperimentManager:
    """
    Dispatches experiment configs.

    Sweep configs go to the experiment class matching their kind and
    source variant; single solves and tensor exports are handled here.
    """

    EXPERIMENTS = {
        cls.NAME: cls
        for cls in (
            PassiveRateExperiment,
            ActiveRateExperiment,
            SmallInclusionExperiment,
            CloakBustExperiment,
            SyntheticPowerLaw,
        )
    }

    @staticmethod
    def run_sweep(
        config: ExperimentConfig,
        solver: Optional[SolverConfig] = None,
        threads: int = 1,
        tolerance: Optional[float] = None,
        tracker: Optional[SolveTracker] = None,
    ) -> SweepResult:
        """
        Run the sweep a config describes.

        Args:
            config: Validated experiment config of kind sweep, small-inclusion or cloak-bust
            solver: Numerical settings
            threads: Worker processes
            tolerance: Slope allowance; None keeps the experiment default

        Returns:
            SweepResult of the dispatched experiment

        Raises:
            ConfigurationError: the kind is not a sweep or the source does not fit it
        """
        cfg = solver or SolverConfig()
        common = dict(grid_shape=config.grid.shape, threads=threads, tolerance=tolerance,
                      config=cfg, tracker=tracker)
        src = config.source

        if config.kind == "sweep":
            if src.kind == "plane-wave":
                return PassiveRateExperiment.run(config.cloak, config.sweep.rho, src, **common)
            if src.kind in CURRENT_KINDS:
                return ActiveRateExperiment.run(config.cloak, src, config.sweep.rho, **common)
            raise ConfigurationError(f"rate sweeps take a plane wave or a current, not '{src.kind}'")

        if config.kind == "small-inclusion":
            if src is not None and src.kind != "plane-wave":
                raise ConfigurationError(f"small-inclusion sweeps take a plane wave, not '{src.kind}'")
            profile = config.trace_profile
            if profile is not None:
                profile = (np.asarray(profile[0], dtype=complex), np.asarray(profile[1], dtype=complex))
            return SmallInclusionExperiment.run(config.sweep.trace_mode, config.sweep.tau,
                                                config.sweep.omega, src, profile, **common)

        if config.kind == "cloak-bust":
            if src is not None and src.kind != "plane-wave":
                raise ConfigurationError(f"cloak-bust sweeps take a plane wave, not '{src.kind}'")
            eps_grid = config.sweep.eps_scan if config.sweep.eps_scan is not None else EPS_SCAN
            return CloakBustExperiment.run(config.cloak, config.sweep.rho, src,
                                           eps_grid=eps_grid, **common)

        raise ConfigurationError(f"config kind '{config.kind}' is not a sweep")

    @staticmethod
    def selftest(power: float, rho_list=None, threads: int = 1, tolerance: Optional[float] = None,
                 tracker: Optional[SolveTracker] = None) -> SweepResult:
        return SyntheticPowerLaw.run(power, rho_list, threads, tolerance, tracker)

    @staticmethod
    def solve(
        config: ExperimentConfig,
        solver: Optional[SolverConfig] = None,
        tracker: Optional[SolveTracker] = None,
    ) -> SolveOutcome:
        """
        Single solve at the config's rho, with energy and cross-section checks.

        Plane waves and currents are solved on the virtual sphere, whose
        far field equals the physical one. A trace source is solved on its
        own sphere and needs no cloak parameters beyond omega.
        """
        cfg = solver or SolverConfig()
        if config.kind != "solve":
            raise ConfigurationError(f"config kind '{config.kind}' is not a single solve")
        spec, src = config.cloak, config.source
        grid = make_grid(*config.grid.shape)
        start = time.perf_counter()
        energy = sections = None

        if src.kind == "plane-wave":
            sphere = virtual_scatterer(spec)
            coeffs = plane_wave_solve(sphere, spec.omega, src, cfg)
            energy = energy_balance(sphere, spec.omega, src, coeffs, cfg)
            sections = cross_sections(coeffs, spec.omega, src)
            kind = "plane-wave"
        elif src.kind in CURRENT_KINDS:
            validate_source(spec, src)
            sphere = virtual_scatterer(spec)
            local = virtual_source(spec, src)
            coeffs = current_n1_solve(sphere, spec.omega, local, cfg)
            energy = energy_balance(sphere, spec.omega, local, coeffs, cfg)
            kind = "current"
        else:
            coeffs = exterior_trace_solve(src.radius, spec.omega, src, cfg)
            kind = "trace"

        if tracker is not None:
            tracker.record(kind, time.perf_counter() - start)
        pattern = pattern_from_coefficients(coeffs, spec.omega, grid)
        return SolveOutcome(coeffs=coeffs, pattern=pattern, energy=energy, sections=sections)

    @staticmethod
    def export_tensors(config: ExperimentConfig) -> pd.DataFrame:
        """Physical eps, mu and sigma over the export grid of the config."""
        if config.export is None:
            raise ConfigurationError("tensor export needs an [export] section")
        return tensor_grid_frame(config.cloak, config.export.iter_points())
