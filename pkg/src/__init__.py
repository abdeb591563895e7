"""Initialize src package."""

from src.config import SolverConfig, RateCalculator
from src.exceptions import CloakBenchError

__all__ = [
    'SolverConfig',
    'RateCalculator',
    'CloakBenchError',
]
