"""Exception hierarchy for CloakBench.

All package errors inherit from CloakBenchError so callers (the CLI in
particular) can catch them generically and map them to exit codes.
"""


class CloakBenchError(RuntimeError):
    """Base exception for all CloakBench errors."""


class ConfigurationError(CloakBenchError):
    """Invalid or incomplete configuration, or an invalid cloak/source spec."""


class TheoremPreconditionError(ConfigurationError):
    """A source violates the conductivity lower bound required for core currents."""


class DomainError(CloakBenchError):
    """A point lies outside the domain of a map or inside the scatterer."""


class SingularJacobianError(CloakBenchError):
    """Jacobian determinant too small to push a tensor forward."""


class SolverError(CloakBenchError):
    """Base class for layered-sphere solver failures."""


class CutoffError(SolverError):
    """Multipole tail did not decay below tolerance before N_max."""


class PassivityError(SolverError):
    """Computed absorption is negative beyond tolerance."""


class UnsupportedSourceError(SolverError):
    """Source support straddles a material interface."""


class OverflowGuardError(SolverError):
    """Argument outside the safe band where unscaled Riccati values are needed."""


class ResonanceDivisionError(SolverError):
    """Zero denominator while dividing by an outgoing Riccati function."""


class DegenerateFitError(CloakBenchError):
    """Slope fit requested on fewer than four points or equal abscissae."""


class GridResolutionWarning(UserWarning):
    """Quadrature grid too coarse, or a sweep point was dropped."""
