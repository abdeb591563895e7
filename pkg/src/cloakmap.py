"""
Exponent bookkeeping, predicted decay rates and the virtual-space reduction.

Every solve works in the virtual configuration: the blow-up map is the
identity outside the cloak, so the physical scattering amplitude equals the
amplitude of a small two-shell sphere of radius ``rho * R_inner`` in vacuum,
with sources pulled back by ``J(x) = rho^-2 J~(x / rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import ConfigurationError, TheoremPreconditionError

Number = Union[int, Fraction, float]
Vector3 = tuple[float, float, float]

_ZERO3: Vector3 = (0.0, 0.0, 0.0)


# ============================================================================
# Exponents and rates
# ============================================================================

@dataclass(frozen=True)
class LayerExponents:
    """Layer scaling exponents and the two derived decay exponents."""

    r: Number
    s: Number
    t: Number
    zeta1: Number
    zeta2: Number

    @property
    def valid(self) -> bool:
        return self.zeta1 > 0


@dataclass(frozen=True)
class PredictedRates:
    passive: Number
    active_core: Number
    active_shell: Number


def exact(value: Number) -> Number:
    """Rational view of a number; floats go through their shortest repr."""
    if isinstance(value, (int, Fraction)):
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"exponent must be finite, got {value}")
    return Fraction(repr(value))


def exponents(r: Number, s: Number, t: Number) -> LayerExponents:
    """
    Decay exponents of the conducting layer.

    Integer and Fraction inputs give exact results.

    Example:
        >>> exponents(0, 2, 0).zeta1
        3
    """
    zeta1 = min(s + 1, s + 5 - 2 * (t + r), 5 - 2 * t - s)
    zeta2 = min(s, s + 2 - t - r, 2 - t)
    return LayerExponents(r=r, s=s, t=t, zeta1=zeta1, zeta2=zeta2)


def predicted_rates(exp: LayerExponents) -> PredictedRates:
    """Passive min(zeta1, 3), core current zeta1/2, shell current zeta2."""
    half = Fraction(exp.zeta1, 2) if isinstance(exp.zeta1, (int, Fraction)) else exp.zeta1 / 2
    return PredictedRates(
        passive=min(exp.zeta1, 3),
        active_core=half,
        active_shell=exp.zeta2,
    )


# ============================================================================
# Cloak specification
# ============================================================================

class CoreMedium(BaseModel):
    """Isotropic cloaked content occupying the inner half-ball."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eps: float = Field(1.0, gt=0, description="Core permittivity eps_a")
    mu: float = Field(1.0, gt=0, description="Core permeability mu_a")
    sigma: float = Field(0.0, ge=0, description="Core conductivity sigma_a")


class CloakSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    rho: float = Field(..., gt=0, lt=1, description="Regularization parameter")
    r: float = 0.0
    s: float = 2.0
    t: float = 0.0
    alpha: float = Field(1.0, gt=0)
    beta: float = Field(1.0, gt=0)
    eta: float = Field(1.0, gt=0)
    core: CoreMedium = Field(default_factory=CoreMedium)
    omega: float = Field(..., gt=0, description="Angular frequency")
    R_inner: float = Field(1.0, gt=0)
    R_outer: float = Field(2.0, gt=0)
    conducting_layer: bool = Field(True, description="False replaces the lossy layer by vacuum")
    c0: float = Field(1e-3, gt=0)
    C0: float = Field(1e3, gt=0)

    @model_validator(mode="after")
    def _check_bounds(self) -> "CloakSpec":
        if self.R_inner >= self.R_outer:
            raise ValueError(f"R_inner ({self.R_inner}) must be below R_outer ({self.R_outer})")
        if self.c0 > self.C0:
            raise ValueError(f"c0 ({self.c0}) exceeds C0 ({self.C0})")
        if not self.c0 <= self.eta <= self.C0:
            raise ValueError(f"eta = {self.eta} outside [{self.c0}, {self.C0}]")
        return self

    @property
    def exponents(self) -> LayerExponents:
        return exponents(exact(self.r), exact(self.s), exact(self.t))

    def with_rho(self, rho: float) -> "CloakSpec":
        """Copy at another regularization parameter, re-validated."""
        return CloakSpec.model_validate({**self.model_dump(), "rho": rho})


# ============================================================================
# Sources
# ============================================================================

def _complex(re: Vector3, im: Vector3) -> np.ndarray:
    return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)


class PlaneWave(BaseModel):
    """Incident field E^i = pol exp(i omega khat . x)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["plane-wave"] = "plane-wave"
    khat: Vector3 = (0.0, 0.0, 1.0)
    pol_re: Vector3 = (1.0, 0.0, 0.0)
    pol_im: Vector3 = _ZERO3

    @model_validator(mode="after")
    def _transverse(self) -> "PlaneWave":
        k = np.asarray(self.khat, dtype=float)
        if abs(np.linalg.norm(k) - 1.0) > 1e-9:
            raise ValueError(f"khat must be a unit vector, |khat| = {np.linalg.norm(k)}")
        pol = self.pol
        if np.linalg.norm(pol) == 0.0:
            raise ValueError("polarization must be nonzero")
        if abs(np.dot(pol, k)) >= 1e-12:
            raise ValueError(f"polarization not transverse: |pol . khat| = {abs(np.dot(pol, k)):.3e}")
        return self

    @property
    def pol(self) -> np.ndarray:
        return _complex(self.pol_re, self.pol_im)

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.khat, dtype=float)


class CoreBallCurrent(BaseModel):
    """Constant current density on a centred ball."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["core-current"] = "core-current"
    radius: float = Field(..., gt=0)
    J_re: Vector3 = (1.0, 0.0, 0.0)
    J_im: Vector3 = _ZERO3

    @property
    def J(self) -> np.ndarray:
        return _complex(self.J_re, self.J_im)

    @property
    def r_in(self) -> float:
        return 0.0

    @property
    def r_out(self) -> float:
        return self.radius

    def scaled(self, rho: float) -> "CoreBallCurrent":
        return self.model_copy(update={
            "radius": self.radius * rho,
            "J_re": tuple(v / rho ** 2 for v in self.J_re),
            "J_im": tuple(v / rho ** 2 for v in self.J_im),
        })


class ShellBallCurrent(BaseModel):
    """Constant current density on a centred spherical shell."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["shell-current"] = "shell-current"
    r_in: float = Field(..., gt=0)
    r_out: float = Field(..., gt=0)
    J_re: Vector3 = (1.0, 0.0, 0.0)
    J_im: Vector3 = _ZERO3

    @model_validator(mode="after")
    def _ordered(self) -> "ShellBallCurrent":
        if self.r_in >= self.r_out:
            raise ValueError(f"shell radii not ordered: r_in={self.r_in}, r_out={self.r_out}")
        return self

    @property
    def J(self) -> np.ndarray:
        return _complex(self.J_re, self.J_im)

    def scaled(self, rho: float) -> "ShellBallCurrent":
        return self.model_copy(update={
            "r_in": self.r_in * rho,
            "r_out": self.r_out * rho,
            "J_re": tuple(v / rho ** 2 for v in self.J_re),
            "J_im": tuple(v / rho ** 2 for v in self.J_im),
        })


class TangentialTrace(BaseModel):
    """
    Prescribed tangential electric field nu x E on a sphere of given radius.

    ``te[n-1]`` and ``tm[n-1]`` are the order-n coefficients in the
    x-polarized multipole family expressed in ``frame`` (rows e1, e2, e3);
    the physical trace is ``w1`` times that family plus ``w2`` times its
    rotation by 90 degrees about e3.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["trace"] = "trace"
    radius: float = Field(..., gt=0)
    te_re: list[float]
    te_im: list[float] = Field(default_factory=list)
    tm_re: list[float]
    tm_im: list[float] = Field(default_factory=list)
    frame: Optional[list[list[float]]] = None
    weights_re: tuple[float, float] = (1.0, 0.0)
    weights_im: tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def _shapes(self) -> "TangentialTrace":
        if not self.te_re or len(self.te_re) != len(self.tm_re):
            raise ValueError("te and tm must be nonempty and of equal length")
        for name, imag in (("te_im", self.te_im), ("tm_im", self.tm_im)):
            if imag and len(imag) != len(self.te_re):
                raise ValueError(f"{name} length does not match te_re")
        if self.frame is not None:
            m = np.asarray(self.frame, dtype=float)
            if m.shape != (3, 3) or not np.allclose(m @ m.T, np.eye(3), atol=1e-10):
                raise ValueError("frame must be a 3x3 orthonormal matrix")
        return self

    @staticmethod
    def _join(re, im) -> np.ndarray:
        out = np.asarray(re, dtype=complex)
        if im:
            out = out + 1j * np.asarray(im, dtype=float)
        return out

    @property
    def te(self) -> np.ndarray:
        return self._join(self.te_re, self.te_im)

    @property
    def tm(self) -> np.ndarray:
        return self._join(self.tm_re, self.tm_im)

    @property
    def frame_matrix(self) -> np.ndarray:
        return np.eye(3) if self.frame is None else np.asarray(self.frame, dtype=float)

    @property
    def weights(self) -> tuple[complex, complex]:
        return (complex(self.weights_re[0], self.weights_im[0]),
                complex(self.weights_re[1], self.weights_im[1]))

    @classmethod
    def from_complex(cls, radius: float, te, tm, frame=None, weights=(1.0, 0.0)) -> "TangentialTrace":
        te = np.asarray(te, dtype=complex)
        tm = np.asarray(tm, dtype=complex)
        w = [complex(v) for v in weights]
        return cls(
            radius=radius,
            te_re=te.real.tolist(), te_im=te.imag.tolist(),
            tm_re=tm.real.tolist(), tm_im=tm.imag.tolist(),
            frame=None if frame is None else np.asarray(frame, dtype=float).tolist(),
            weights_re=(w[0].real, w[1].real),
            weights_im=(w[0].imag, w[1].imag),
        )


SourceSpec = Annotated[
    Union[PlaneWave, CoreBallCurrent, ShellBallCurrent, TangentialTrace],
    Field(discriminator="kind"),
]

CURRENT_KINDS = ("core-current", "shell-current")


def validate_source(spec: CloakSpec, src) -> None:
    """
    Check a physical-space source against the cloak geometry.

    Raises:
        ConfigurationError: support outside the core or outside the layer
        TheoremPreconditionError: core current with sigma_a below c0
    """
    slack = 1e-12 * spec.R_inner
    half = 0.5 * spec.R_inner
    if src.kind == "core-current":
        if src.radius > half + slack:
            raise ConfigurationError(
                f"core current radius {src.radius} exceeds R_inner/2 = {half}")
        if spec.core.sigma < spec.c0:
            raise TheoremPreconditionError(
                f"core current needs sigma_a >= c0 = {spec.c0}, got {spec.core.sigma}")
    elif src.kind == "shell-current":
        if src.r_in < half - slack or src.r_out > spec.R_inner + slack:
            raise ConfigurationError(
                f"shell current [{src.r_in}, {src.r_out}] outside the layer [{half}, {spec.R_inner}]")


# ============================================================================
# Virtual reduction
# ============================================================================

def virtual_scatterer(spec: CloakSpec):
    """
    Two-shell sphere seen in virtual space.

    Core ``[0, rho R_i / 2]``: eps = (eps_a + i sigma_a / omega) / rho, mu = mu_a / rho.
    Shell ``[rho R_i / 2, rho R_i]``: eps = rho^-r alpha + i rho^-s beta / omega,
    mu = rho^-t / eta; vacuum when the conducting layer is switched off.
    """
    from src.mie_solver.coefficients import LayeredSphere, Shell

    rho, omega = spec.rho, spec.omega
    core = spec.core
    core_shell = Shell(
        outer_radius=0.5 * rho * spec.R_inner,
        eps=complex(core.eps, core.sigma / omega) / rho,
        mu=complex(core.mu / rho),
    )
    if spec.conducting_layer:
        eps_l = complex(rho ** (-spec.r) * spec.alpha, rho ** (-spec.s) * spec.beta / omega)
        mu_l = complex(rho ** (-spec.t) / spec.eta)
    else:
        eps_l, mu_l = 1.0 + 0j, 1.0 + 0j
    layer = Shell(outer_radius=rho * spec.R_inner, eps=eps_l, mu=mu_l)
    return LayeredSphere(shells=(core_shell, layer))


def virtual_source(spec: CloakSpec, src):
    """Pull a physical source back to virtual space: radii times rho, density times rho^-2."""
    if src.kind in CURRENT_KINDS:
        return src.scaled(spec.rho)
    return src


def physical_source(spec: CloakSpec, src):
    """Inverse of ``virtual_source``."""
    if src.kind in CURRENT_KINDS:
        return src.scaled(1.0 / spec.rho)
    return src


def current_l2_norm(src) -> float:
    """L2 norm of a constant-density ball or shell current."""
    volume = 4.0 / 3.0 * math.pi * (src.r_out ** 3 - src.r_in ** 3)
    return float(np.linalg.norm(src.J) * math.sqrt(volume))
