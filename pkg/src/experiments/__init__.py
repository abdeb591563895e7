"""Initialize experiments package."""

from src.experiments.sweep import PointOutcome, SweepResult, fit_slope, run_sweep, summarize
from src.experiments.passive_rate import PassiveRateExperiment
from src.experiments.active_rate import ActiveRateExperiment
from src.experiments.small_inclusion import SmallInclusionExperiment
from src.experiments.cloak_bust import CloakBustExperiment
from src.experiments.synthetic import SyntheticPowerLaw

__all__ = [
    'PointOutcome',
    'SweepResult',
    'fit_slope',
    'run_sweep',
    'summarize',
    'PassiveRateExperiment',
    'ActiveRateExperiment',
    'SmallInclusionExperiment',
    'CloakBustExperiment',
    'SyntheticPowerLaw',
]


def passive_rate_experiment(spec_template, rho_list=None, incident=None, **kwargs) -> SweepResult:
    return PassiveRateExperiment.run(spec_template, rho_list, incident, **kwargs)


def active_rate_experiment(spec_template, rho_list, src, **kwargs) -> SweepResult:
    return ActiveRateExperiment.run(spec_template, src, rho_list, **kwargs)


def small_inclusion_experiment(tau_list=None, trace_mode="fixed-profile", omega=1.0, **kwargs) -> SweepResult:
    return SmallInclusionExperiment.run(trace_mode, tau_list, omega, **kwargs)


def cloak_bust_experiment(spec_without_layer, rho_list=None, incident=None, **kwargs) -> SweepResult:
    return CloakBustExperiment.run(spec_without_layer, rho_list, incident, **kwargs)


__all__ += [
    'passive_rate_experiment',
    'active_rate_experiment',
    'small_inclusion_experiment',
    'cloak_bust_experiment',
]
