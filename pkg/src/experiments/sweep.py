"""Sweep driver and log-log slope estimation."""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from src.config import RateCalculator
from src.exceptions import CloakBenchError, DegenerateFitError, GridResolutionWarning
from src.utils.logging_handler import SolveTracker, progress

NORM_FLOOR = 1e-300
MIN_POINTS = 4
DEFAULT_RHO_RANGE = (0.1, 0.01)
DEFAULT_TAU_RANGE = (0.3, 0.03)
DEFAULT_POINTS = 6
DEFAULT_GRID = (64, 128)


@dataclass(frozen=True)
class PointOutcome:
    """Result of one sweep point; ``norm`` is None when the solve failed."""

    value: float
    norm: Optional[float]
    cutoff: int = 0
    seconds: float = 0.0
    kind: str = "plane-wave"
    error: str = ""
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepResult:
    experiment: str
    rho_values: tuple[float, ...]
    norms: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    residuals: tuple[float, ...]
    predicted: float
    tolerance: float
    failed: tuple[float, ...] = ()
    flagged_zero: tuple[float, ...] = ()
    details: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return RateCalculator.threshold(self.predicted, self.tolerance)

    @property
    def passed(self) -> bool:
        if self.flagged_zero and len(self.flagged_zero) == len(self.rho_values):
            return False
        return RateCalculator.passes(self.slope, self.predicted, self.tolerance)

    def summary_line(self) -> str:
        verdict = "pass" if self.passed else "fail"
        return f"slope={self.slope!r} predicted>={self.threshold!r} {verdict}"


def fit_slope(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """
    Least squares on (log rho, log norm).

    Args:
        points: (rho, norm) pairs, at least four, all positive

    Returns:
        (slope, intercept, r_squared); r_squared is 1 for an exact fit,
        constant norms included

    Raises:
        DegenerateFitError: fewer than four points or all rho equal
    """
    if len(points) < MIN_POINTS:
        raise DegenerateFitError(f"slope fit needs at least {MIN_POINTS} points, got {len(points)}")
    rho = np.array([p[0] for p in points], dtype=float)
    norm = np.array([p[1] for p in points], dtype=float)
    if np.any(rho <= 0) or np.any(norm <= 0):
        raise DegenerateFitError("slope fit needs positive rho and norm values")
    if np.ptp(rho) == 0.0:
        raise DegenerateFitError(f"all abscissae equal ({rho[0]})")
    x, y = np.log(rho), np.log(norm)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), r_squared


def _guarded(task: Callable[[float], PointOutcome], value: float) -> PointOutcome:
    start = time.perf_counter()
    try:
        return task(value)
    except CloakBenchError as exc:
        return PointOutcome(value=value, norm=None, seconds=time.perf_counter() - start,
                            error=f"{type(exc).__name__}: {exc}")


def run_sweep(
    values: Sequence[float],
    task: Callable[[float], PointOutcome],
    threads: int = 1,
    tracker: Optional[SolveTracker] = None,
    quiet: bool = False,
) -> list[PointOutcome]:
    """
    Evaluate ``task`` at each value, concurrently when threads > 1.

    Results come back sorted by value, descending, whatever the completion
    order. Failed points are kept with ``norm=None`` and a warning.
    """
    values = [float(v) for v in values]
    if threads > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_guarded, [task] * len(values), values))
    else:
        outcomes = [_guarded(task, v) for v in values]

    outcomes.sort(key=lambda o: o.value, reverse=True)
    for outcome in outcomes:
        ok = outcome.norm is not None
        if tracker is not None:
            tracker.record(outcome.kind, outcome.seconds, ok)
        if not ok:
            warnings.warn(f"sweep point {outcome.value!r} excluded: {outcome.error}",
                          GridResolutionWarning, stacklevel=2)
        elif not quiet:
            progress(f"rho={outcome.value!r} norm={outcome.norm!r} N={outcome.cutoff}")
    return outcomes


def summarize(
    experiment: str,
    outcomes: Sequence[PointOutcome],
    predicted: float,
    tolerance: float,
    details: Optional[dict] = None,
) -> SweepResult:
    """Fit the successful points; flag norms below the numeric floor."""
    good = [o for o in outcomes if o.norm is not None]
    failed = tuple(o.value for o in outcomes if o.norm is None)
    flagged = tuple(o.value for o in good if not o.norm > NORM_FLOOR)
    usable = [(o.value, o.norm) for o in good if o.norm > NORM_FLOOR]

    if good and len(flagged) == len(good):
        slope, intercept, r_squared, residuals = 0.0, 0.0, 1.0, (0.0,) * len(good)
    else:
        slope, intercept, r_squared = fit_slope(usable)
        residuals = tuple(
            float(math.log(n) - (slope * math.log(r) + intercept)) if n > NORM_FLOOR else 0.0
            for r, n in ((o.value, o.norm) for o in good)
        )

    return SweepResult(
        experiment=experiment,
        rho_values=tuple(o.value for o in good),
        norms=tuple(float(o.norm) for o in good),
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        residuals=residuals,
        predicted=float(predicted),
        tolerance=float(tolerance),
        failed=failed,
        flagged_zero=flagged,
        details=dict(details or {}),
    )


def geometric_grid(start: float, stop: float, count: int = 6) -> list[float]:
    """Descending geometric grid from start to stop inclusive."""
    return [float(v) for v in np.geomspace(start, stop, count)]
