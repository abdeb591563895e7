"""Logging and data handling utilities."""

import json
import os
import sys
from typing import Iterable, Optional

import pandas as pd


class DataLogger:
    """Handle result files and the run log for CLI invocations."""

    RUN_COLUMNS = ['RunID', 'Command', 'Config', 'ExitCode', 'Summary']

    def __init__(self, logs_dir: str = "./logs"):
        """
        Initialize the data logger.

        Args:
            logs_dir: Directory for result files and the run log
        """
        self.logs_dir = logs_dir
        self.runs_csv_path = os.path.join(logs_dir, "runs.csv")
        self._initialize_directories()

    def _initialize_directories(self) -> None:
        """Create the output directory if it doesn't exist."""
        os.makedirs(self.logs_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.logs_dir, name)

    def get_next_run_id(self) -> int:
        """
        Get the next run ID based on the existing run log.

        Returns:
            Next run ID to use
        """
        if not os.path.exists(self.runs_csv_path):
            return 1
        runs_df = pd.read_csv(self.runs_csv_path)
        if runs_df.empty:
            return 1
        return int(runs_df['RunID'].astype(int).max()) + 1

    def log_run(self, command: str, config: str, exit_code: int, summary: str) -> int:
        """
        Append one row to the run log; the header is written only once.

        Returns:
            The run ID that was logged
        """
        run_id = self.get_next_run_id()
        run_df = pd.DataFrame({
            'RunID': [run_id],
            'Command': [command],
            'Config': [config],
            'ExitCode': [exit_code],
            'Summary': [summary],
        })
        run_df.to_csv(
            self.runs_csv_path, index=False, mode='a',
            header=not os.path.exists(self.runs_csv_path),
        )
        return run_id

    def write_sweep_csv(self, rho_values: Iterable[float], norms: Iterable[float], name: str = "sweep.csv") -> str:
        """Write the (rho, norm) table of a sweep."""
        path = self.path(name)
        pd.DataFrame({'rho': list(rho_values), 'norm': list(norms)}).to_csv(path, index=False)
        return path

    def write_farfield_csv(self, frame: pd.DataFrame, name: str = "farfield.csv") -> str:
        path = self.path(name)
        frame.to_csv(path, index=False)
        return path

    def write_tensor_csv(self, frame: pd.DataFrame, name: str = "tensors.csv") -> str:
        """Tensor exports keep every digit."""
        path = self.path(name)
        frame.to_csv(path, index=False, float_format="%.17e")
        return path

    def write_json(self, payload: dict, name: str) -> str:
        """Deterministic JSON: insertion key order, shortest round-trip floats."""
        path = self.path(name)
        with open(path, "w") as file:
            file.write(json.dumps(payload, indent=2, sort_keys=False))
            file.write("\n")
        return path


class SolveTracker:
    """Track solves, failures and wall time across a run."""

    def __init__(self):
        """Initialize solve tracking."""
        self.plane_wave_solves = 0
        self.current_solves = 0
        self.trace_solves = 0
        self.failed_points = 0
        self.total_seconds = 0.0

    def record(self, kind: str, seconds: float, ok: bool = True) -> None:
        """
        Update counters for one solve.

        Args:
            kind: Solve kind ('plane-wave', 'current' or 'trace')
            seconds: Wall time spent on it
            ok: False when the point failed
        """
        if kind == "plane-wave":
            self.plane_wave_solves += 1
        elif kind == "current":
            self.current_solves += 1
        elif kind == "trace":
            self.trace_solves += 1

        if not ok:
            self.failed_points += 1
        self.total_seconds += seconds

    def get_summary(self, include_time: bool = True) -> dict:
        """
        Get a summary of the solves performed.

        Args:
            include_time: False leaves out wall time, for files that must be reproducible

        Returns:
            Dictionary of counters and total wall time
        """
        summary = {
            'plane_wave_solves': self.plane_wave_solves,
            'current_solves': self.current_solves,
            'trace_solves': self.trace_solves,
            'failed_points': self.failed_points,
        }
        if include_time:
            summary['total_seconds'] = self.total_seconds
        return summary


def progress(message: str, stream: Optional[object] = None) -> None:
    """Print a progress line to stderr so stdout stays machine-readable."""
    print(message, file=stream or sys.stderr, flush=True)
