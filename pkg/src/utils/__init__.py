"""Initialize utils package."""

from src.utils.logging_handler import DataLogger, SolveTracker, progress

__all__ = [
    'DataLogger',
    'SolveTracker',
    'progress',
]
