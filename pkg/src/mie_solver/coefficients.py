"""
Result and geometry types for the layered-sphere solver.

Field convention inside any region with wavenumber k and permeability mu:

    E = sum_n E_n ( M_o1n[U_TE] + N_e1n[U_TM] )
    H = k / (i omega mu) sum_n E_n ( N_o1n[U_TE] + M_e1n[U_TM] )

where E_n = i^n (2n+1) / (n(n+1)) and M[U], N[U] are the usual vector
spherical harmonics with rho z_n(rho) replaced by the Riccati combination
U(rho), rho = k r. Outside the sphere the scattered part is
U_TE = -b xi and U_TM = i a xi, which is the Bohren-Huffman convention.
The y'-polarized member of the family is the x'-polarized one rotated by
90 degrees about e3; physical fields are w1 * (x' member) + w2 * (y' member).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.exceptions import ConfigurationError


def mode_prefactor(nmax: int) -> np.ndarray:
    """E_n for n = 1..nmax."""
    n = np.arange(1, nmax + 1)
    return (1j ** n) * (2 * n + 1) / (n * (n + 1))


@dataclass(frozen=True)
class Shell:
    """Homogeneous isotropic layer ending at ``outer_radius``."""

    outer_radius: float
    eps: complex
    mu: complex

    @property
    def index(self) -> complex:
        # product of principal roots keeps Im m >= 0 for passive media
        return complex(np.sqrt(complex(self.eps)) * np.sqrt(complex(self.mu)))

    @property
    def te_admittance(self) -> complex:
        return complex(np.sqrt(complex(self.eps)) / np.sqrt(complex(self.mu)))

    @property
    def tm_admittance(self) -> complex:
        return complex(np.sqrt(complex(self.mu)) / np.sqrt(complex(self.eps)))

    def wavenumber(self, omega: float) -> complex:
        return omega * self.index

    @property
    def is_lossy(self) -> bool:
        return complex(self.eps).imag > 0 or complex(self.mu).imag > 0


@dataclass(frozen=True)
class LayeredSphere:
    """Concentric shells listed from the centre outwards, embedded in vacuum."""

    shells: tuple[Shell, ...]

    def __post_init__(self):
        if not self.shells:
            raise ConfigurationError("a layered sphere needs at least one shell")
        object.__setattr__(self, "shells", tuple(self.shells))
        previous = 0.0
        for i, shell in enumerate(self.shells):
            if not shell.outer_radius > previous:
                raise ConfigurationError(
                    f"shell radii must increase strictly, shell {i} ends at {shell.outer_radius}")
            if complex(shell.eps).imag < 0 or complex(shell.mu).imag < 0:
                raise ConfigurationError(f"shell {i} is not passive: eps={shell.eps}, mu={shell.mu}")
            previous = shell.outer_radius

    @property
    def radius(self) -> float:
        return self.shells[-1].outer_radius

    @property
    def radii(self) -> list[float]:
        return [s.outer_radius for s in self.shells]

    def inner_radius(self, index: int) -> float:
        return 0.0 if index == 0 else self.shells[index - 1].outer_radius

    def layer_index(self, r: float) -> Optional[int]:
        """Index of the shell containing radius r, or None outside the sphere."""
        for i, shell in enumerate(self.shells):
            if r <= shell.outer_radius:
                return i
        return None

    def split(self, radii, rtol: float = 1e-12) -> "LayeredSphere":
        """Same sphere with extra interfaces at ``radii`` (no change of material)."""
        shells = list(self.shells)
        for radius in sorted(set(float(r) for r in radii)):
            if radius <= 0.0 or radius >= self.radius * (1 + rtol):
                continue
            if any(abs(radius - s.outer_radius) <= rtol * s.outer_radius for s in shells):
                continue
            out = []
            for s in shells:
                lo = out[-1].outer_radius if out else 0.0
                if lo < radius < s.outer_radius:
                    out.append(Shell(radius, s.eps, s.mu))
                out.append(s)
            shells = out
        return LayeredSphere(shells=tuple(shells))


@dataclass(frozen=True)
class LayerAmplitudes:
    """
    Interior expansion of one shell, per order n = 1..N.

    U_TE = te_A psi_n(k r) + te_B xi_n(k r), likewise for TM. ``particular``
    is the constant field per unit local current inside a source shell.
    """

    inner_radius: float
    outer_radius: float
    eps: complex
    mu: complex
    te_A: np.ndarray
    te_B: np.ndarray
    tm_A: np.ndarray
    tm_B: np.ndarray
    particular: complex = 0j

    @property
    def shell(self) -> Shell:
        return Shell(self.outer_radius, self.eps, self.mu)


@dataclass(frozen=True)
class MultipoleCoefficients:
    """
    Outgoing coefficients of a solve plus what is needed to rebuild fields.

    ``frame`` rows are e1, e2, e3 of the local frame; ``weights`` combine the
    x'- and y'-polarized members.
    """

    a: np.ndarray
    b: np.ndarray
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))
    weights: tuple[complex, complex] = (1.0 + 0j, 0j)
    kind: str = "plane-wave"
    sphere: Optional[LayeredSphere] = None
    interior: Optional[tuple[LayerAmplitudes, ...]] = None
    source_layers: tuple[int, ...] = ()

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        b = np.atleast_1d(np.asarray(self.b, dtype=complex))
        if a.shape != b.shape:
            raise ValueError(f"a and b differ in length: {a.shape} vs {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "frame", np.asarray(self.frame, dtype=float))
        object.__setattr__(self, "weights", tuple(complex(w) for w in self.weights))

    @property
    def N(self) -> int:
        return int(self.a.size)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    @property
    def weight_norm2(self) -> float:
        w1, w2 = self.weights
        return abs(w1) ** 2 + abs(w2) ** 2

    def tail_ratio(self) -> float:
        """(|a_N| + |b_N|) / max_n (|a_n| + |b_n|); zero when all vanish."""
        size = np.abs(self.a) + np.abs(self.b)
        top = float(size.max()) if size.size else 0.0
        return 0.0 if top == 0.0 else float(size[-1] / top)

    def to_dict(self) -> dict:
        """JSON-friendly view with complex numbers split into parts."""
        return {
            "kind": self.kind,
            "N": self.N,
            "a_re": self.a.real.tolist(),
            "a_im": self.a.imag.tolist(),
            "b_re": self.b.real.tolist(),
            "b_im": self.b.imag.tolist(),
            "frame": self.frame.tolist(),
            "weights_re": [w.real for w in self.weights],
            "weights_im": [w.imag for w in self.weights],
        }


@dataclass(frozen=True)
class NearFieldSample:
    """Tangential fields at one quadrature node of a sphere."""

    point: np.ndarray
    e_tan: np.ndarray
    h_tan: np.ndarray
    weight: float

    @property
    def normal(self) -> np.ndarray:
        return self.point / np.linalg.norm(self.point)
