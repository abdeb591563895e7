"""
Experiment configuration and report models.

A config file is TOML; after ``tomllib`` parsing it validates into
``ExperimentConfig``. Reports are built from experiment results and
dumped with ``model_dump(mode="json")`` so key order is fixed.
"""

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.cloakmap import CloakSpec, SourceSpec
from src.experiments.sweep import DEFAULT_GRID, SweepResult
from src.materials import RegularGrid

ExperimentKind = Literal["solve", "sweep", "small-inclusion", "cloak-bust", "export-tensors"]

# Sections each kind cannot do without
REQUIRED_SECTIONS: dict[str, tuple[str, ...]] = {
    "solve": ("cloak", "source"),
    "sweep": ("cloak", "source"),
    "small-inclusion": (),
    "cloak-bust": ("cloak",),
    "export-tensors": ("cloak", "export"),
}

# ============================================================================
# Config sections
# ============================================================================

class SweepSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rho: Optional[list[float]] = Field(None, description="Regularizers; default 6 points from 0.1 to 0.01")
    tau: Optional[list[float]] = Field(None, description="Inclusion radii; default 6 points from 0.3 to 0.03")
    trace_mode: Literal["fixed-profile", "incident-trace"] = "fixed-profile"
    omega: float = Field(1.0, gt=0, description="Frequency of small-inclusion sweeps")
    te: Optional[list[float]] = Field(None, description="Fixed trace profile, TE part")
    tm: Optional[list[float]] = Field(None, description="Fixed trace profile, TM part")
    eps_scan: Optional[list[float]] = Field(None, description="Core permittivities of the cloak-bust scan")
    tolerance: Optional[float] = Field(None, ge=0)
    threads: Optional[int] = Field(None, ge=0)

    @model_validator(mode="after")
    def _profile_pair(self) -> "SweepSection":
        if (self.te is None) != (self.tm is None):
            raise ValueError("trace profile needs both 'te' and 'tm'")
        if self.te is not None and len(self.te) != len(self.tm):
            raise ValueError("'te' and 'tm' differ in length")
        return self


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_polar: int = Field(DEFAULT_GRID[0], ge=8)
    n_azimuth: int = Field(DEFAULT_GRID[1], ge=16)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_polar, self.n_azimuth)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str = Field("out", description="Directory for result files and the run log")


class ExperimentConfig(BaseModel):
    """One experiment, as read from a TOML file."""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind = "sweep"
    cloak: Optional[CloakSpec] = None
    source: Optional[SourceSpec] = None
    sweep: SweepSection = Field(default_factory=SweepSection)
    grid: GridSection = Field(default_factory=GridSection)
    export: Optional[RegularGrid] = None
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _sections_present(self) -> "ExperimentConfig":
        missing = [name for name in REQUIRED_SECTIONS[self.kind] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"kind '{self.kind}' needs section(s) {', '.join('[' + m + ']' for m in missing)}")
        return self

    @property
    def trace_profile(self) -> Optional[tuple[list[float], list[float]]]:
        if self.sweep.te is None:
            return None
        return (self.sweep.te, self.sweep.tm)

# ============================================================================
# Reports
# ============================================================================

class SweepPoint(BaseModel):
    rho: float
    norm: float


class SweepReport(BaseModel):
    experiment: str
    config_echo: dict[str, Any]
    points: list[SweepPoint]
    slope: float
    intercept: float
    r2: float
    predicted: float
    tolerance: float
    threshold: float
    passed: bool
    residuals: list[float]
    failed: list[float] = Field(default_factory=list)
    flagged_zero: list[float] = Field(default_factory=list)
    details: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_result(cls, result: SweepResult, config_echo: dict[str, Any]) -> "SweepReport":
        return cls(
            experiment=result.experiment,
            config_echo=config_echo,
            points=[SweepPoint(rho=r, norm=n) for r, n in zip(result.rho_values, result.norms)],
            slope=result.slope,
            intercept=result.intercept,
            r2=result.r_squared,
            predicted=result.predicted,
            tolerance=result.tolerance,
            threshold=result.threshold,
            passed=result.passed,
            residuals=list(result.residuals),
            failed=list(result.failed),
            flagged_zero=list(result.flagged_zero),
            details=result.details,
        )


class Diagnostics(BaseModel):
    """Contents of diagnostics.json for a single solve."""

    kind: str
    omega: float
    cutoff: int
    tail_ratio: float
    energy_residual: Optional[float] = None
    energy_lossless: Optional[bool] = None
    absorbed: Optional[float] = None
    flux_rhs: Optional[float] = None
    cross_sections: Optional[dict[str, float]] = None
    far_field_sup: float
    far_field_l2: float
    tracker: dict[str, Any] = Field(default_factory=dict)
