"""
Material tensors for the regularized cloak.

Symmetric 3x3 tensors, regularity checks, the push-forward of a tensor along
an orientation-preserving map, the radial blow-up map between concentric
balls, and the four-region physical medium (vacuum, cloak, conducting layer,
core). The solver never calls into this module; it exists for construction,
inspection and export.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from src.exceptions import ConfigurationError, DomainError, SingularJacobianError

if TYPE_CHECKING:
    from src.cloakmap import CloakSpec

EIGEN_SLACK = 1e-10
SINGULAR_DET = 1e-300
_ENTRIES = ('xx', 'xy', 'xz', 'yy', 'yz', 'zz')


@dataclass(frozen=True)
class SymTensor3:
    """Real symmetric 3x3 tensor stored as its six upper-triangular entries."""

    xx: float
    xy: float
    xz: float
    yy: float
    yz: float
    zz: float

    @classmethod
    def from_matrix(cls, matrix) -> "SymTensor3":
        """
        Build from a full 3x3 matrix.

        Args:
            matrix: Array-like 3x3, symmetric to 1e-12 relative

        Returns:
            SymTensor3 holding the symmetric part
        """
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        scale = max(np.max(np.abs(m)), 1e-300)
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric")
        s = 0.5 * (m + m.T)
        return cls(s[0, 0], s[0, 1], s[0, 2], s[1, 1], s[1, 2], s[2, 2])

    @classmethod
    def identity(cls) -> "SymTensor3":
        return cls.scalar(1.0)

    @classmethod
    def scalar(cls, value: float) -> "SymTensor3":
        return cls(value, 0.0, 0.0, value, 0.0, value)

    @classmethod
    def diag(cls, a: float, b: float, c: float) -> "SymTensor3":
        return cls(a, 0.0, 0.0, b, 0.0, c)

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ])

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues."""
        return np.linalg.eigvalsh(self.matrix())

    def is_positive_definite(self) -> bool:
        return bool(self.eigenvalues()[0] > 0.0)

    def is_positive_semidefinite(self, slack: float = EIGEN_SLACK) -> bool:
        return bool(self.eigenvalues()[0] >= -slack)

    def scaled(self, factor: float) -> "SymTensor3":
        return SymTensor3(*(factor * getattr(self, e) for e in _ENTRIES))

    def as_row(self, prefix: str) -> dict:
        """Six named columns, e.g. ``eps_xx`` .. ``eps_zz``."""
        return {f"{prefix}_{e}": float(getattr(self, e)) for e in _ENTRIES}


@dataclass(frozen=True)
class MaterialPoint:
    """Permittivity, permeability and conductivity at one point."""

    eps: SymTensor3
    mu: SymTensor3
    sigma: SymTensor3

    @classmethod
    def vacuum(cls) -> "MaterialPoint":
        return cls(SymTensor3.identity(), SymTensor3.identity(), SymTensor3.scalar(0.0))


@dataclass(frozen=True)
class MapSample:
    """A map F evaluated at one point: preimage, image, jacobian and determinant."""

    y: np.ndarray
    x: np.ndarray
    jacobian: np.ndarray
    det: float

    def __post_init__(self):
        if not self.det > 0.0:
            raise DomainError(f"map is not orientation preserving (det = {self.det})")
        direct = float(np.linalg.det(self.jacobian))
        if abs(direct - self.det) > 1e-12 * max(abs(self.det), abs(direct)):
            raise ValueError(
                f"stored determinant {self.det} disagrees with jacobian determinant {direct}"
            )

    @classmethod
    def from_jacobian(cls, y, x, jacobian) -> "MapSample":
        jac = np.asarray(jacobian, dtype=float)
        return cls(
            y=np.asarray(y, dtype=float),
            x=np.asarray(x, dtype=float),
            jacobian=jac,
            det=float(np.linalg.det(jac)),
        )


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of a regularity check; truthy when every bound holds."""

    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_regular(m: MaterialPoint, c: float, C: float) -> RegularityReport:
    """
    Check the two-sided ellipticity bounds of a material point.

    eps and mu must have every eigenvalue in [c, C]; sigma must have every
    eigenvalue in [0, C]. Bounds carry an absolute slack of 1e-10.

    Args:
        m: Material point to check
        c: Lower ellipticity constant
        C: Upper bound

    Returns:
        RegularityReport listing each violated bound with its eigenvalue
    """
    violations = []
    if c > C:
        violations.append(f"lower constant c = {c} exceeds upper constant C = {C}")

    bounds = (("eps", m.eps, c, "c"), ("mu", m.mu, c, "c"), ("sigma", m.sigma, 0.0, "0"))
    for name, tensor, lower, lower_label in bounds:
        for value in tensor.eigenvalues():
            if value < lower - EIGEN_SLACK:
                violations.append(f"{name} eigenvalue {value:.6g} < {lower_label}")
            if value > C + EIGEN_SLACK:
                violations.append(f"{name} eigenvalue {value:.6g} > C")

    return RegularityReport(ok=not violations, violations=violations)


def push_forward(sample: MapSample, m: SymTensor3) -> SymTensor3:
    """
    Push a tensor forward along a map: DF . m . DF^T / |det DF|.

    Args:
        sample: Map evaluated at the preimage point
        m: Tensor at the preimage point

    Returns:
        Tensor at the image point
    """
    if abs(sample.det) < SINGULAR_DET:
        raise SingularJacobianError(f"|det DF| = {abs(sample.det):.3e} below {SINGULAR_DET}")
    jac = sample.jacobian
    return SymTensor3.from_matrix(_symmetrize(jac @ m.matrix() @ jac.T / abs(sample.det)))


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def compose(outer: MapSample, inner: MapSample) -> MapSample:
    """
    Chain rule for F after G, where ``inner`` samples G at y and ``outer``
    samples F at G(y).
    """
    if not np.allclose(outer.y, inner.x, rtol=1e-12, atol=1e-12):
        raise ValueError("outer map must be sampled at the image of the inner map")
    return MapSample(
        y=inner.y,
        x=outer.x,
        jacobian=outer.jacobian @ inner.jacobian,
        det=outer.det * inner.det,
    )


def _radial_coefficients(rho: float, R_inner: float, R_outer: float) -> tuple:
    denom = R_outer - rho * R_inner
    a = R_inner * R_outer * (1.0 - rho) / denom
    b = (R_outer - R_inner) / denom
    return a, b


def _validate_geometry(rho: float, R_inner: float, R_outer: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ConfigurationError(f"rho must lie in (0, 1), got {rho}")
    if not 0.0 < R_inner < R_outer:
        raise ConfigurationError(f"need 0 < R_inner < R_outer, got {R_inner}, {R_outer}")


def radial_blowup_map(rho: float, R_inner: float, R_outer: float, y) -> MapSample:
    """
    Evaluate the blow-up map that expands B(rho R_inner) onto B(R_inner).

    The map is y/rho on the small ball, the radial affine interpolation
    r -> a + b r on the annulus, and the identity on the outer sphere.

    Args:
        rho: Regularizer in (0, 1)
        R_inner: Radius of the cloaked region
        R_outer: Outer radius of the cloak
        y: Point in the virtual domain, |y| <= R_outer

    Returns:
        MapSample with analytic jacobian
    """
    _validate_geometry(rho, R_inner, R_outer)
    y = np.asarray(y, dtype=float)
    r = float(np.linalg.norm(y))
    if r > R_outer * (1.0 + 1e-12):
        raise DomainError(f"|y| = {r} exceeds R_outer = {R_outer}")

    if r <= rho * R_inner:
        jac = np.eye(3) / rho
        return MapSample(y=y, x=y / rho, jacobian=jac, det=rho ** -3)

    if r >= R_outer:
        return MapSample(y=y, x=y.copy(), jacobian=np.eye(3), det=1.0)

    a, b = _radial_coefficients(rho, R_inner, R_outer)
    f = a + b * r
    unit = y / r
    radial = np.outer(unit, unit)
    jac = b * radial + (f / r) * (np.eye(3) - radial)
    return MapSample(y=y, x=f * unit, jacobian=jac, det=b * (f / r) ** 2)


def inverse_radial_map(rho: float, R_inner: float, R_outer: float, x) -> np.ndarray:
    """Preimage of a physical point under the blow-up map."""
    _validate_geometry(rho, R_inner, R_outer)
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r >= R_outer:
        return x.copy()
    if r <= R_inner:
        return rho * x
    a, b = _radial_coefficients(rho, R_inner, R_outer)
    return ((r - a) / b) * (x / r)


TensorLike = Union[SymTensor3, Callable[[np.ndarray], SymTensor3], None]


def _resolve(tensor: TensorLike, x: np.ndarray, default: float) -> SymTensor3:
    if tensor is None:
        return SymTensor3.scalar(default)
    if callable(tensor):
        return tensor(x)
    return tensor


def physical_cloak_tensors(
    spec: "CloakSpec",
    x,
    alpha: TensorLike = None,
    beta: TensorLike = None,
) -> MaterialPoint:
    """
    Physical-space medium of the regularized cloak at a point.

    Args:
        spec: Cloak description
        x: Point in physical space
        alpha: Optional tensor (or callable of x) replacing the scalar layer
            permittivity constant
        beta: Optional tensor (or callable of x) replacing the scalar layer
            conductivity constant

    Returns:
        MaterialPoint for the region containing x
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    rho = spec.rho

    if r > spec.R_outer:
        return MaterialPoint.vacuum()

    if r > spec.R_inner:
        y = inverse_radial_map(rho, spec.R_inner, spec.R_outer, x)
        sample = radial_blowup_map(rho, spec.R_inner, spec.R_outer, y)
        pushed = push_forward(sample, SymTensor3.identity())
        return MaterialPoint(eps=pushed, mu=pushed, sigma=SymTensor3.scalar(0.0))

    if r > 0.5 * spec.R_inner:
        if not spec.conducting_layer:
            return MaterialPoint(
                eps=SymTensor3.scalar(rho),
                mu=SymTensor3.scalar(rho),
                sigma=SymTensor3.scalar(0.0),
            )
        alpha_t = _resolve(alpha, x, spec.alpha)
        beta_t = _resolve(beta, x, spec.beta)
        return MaterialPoint(
            eps=alpha_t.scaled(rho ** (1 - float(spec.r))),
            mu=SymTensor3.scalar(rho ** (1 - float(spec.t)) / spec.eta),
            sigma=beta_t.scaled(rho ** (1 - float(spec.s))),
        )

    core = spec.core
    return MaterialPoint(
        eps=SymTensor3.scalar(core.eps),
        mu=SymTensor3.scalar(core.mu),
        sigma=SymTensor3.scalar(core.sigma),
    )


# ============================================================================
# Tensor-field export
# ============================================================================

class RegularGrid(BaseModel):
    """Cartesian sampling grid, either as axis ranges or an explicit point list."""

    x: Optional[tuple[float, float, int]] = Field(None, description="(min, max, count)")
    y: Optional[tuple[float, float, int]] = Field(None, description="(min, max, count)")
    z: Optional[tuple[float, float, int]] = Field(None, description="(min, max, count)")
    points: Optional[list[tuple[float, float, float]]] = None

    @model_validator(mode='after')
    def _check_complete(self):
        axes = (self.x, self.y, self.z)
        if self.points is None and any(axis is None for axis in axes):
            raise ValueError("grid needs either 'points' or all of 'x', 'y', 'z'")
        for axis in axes:
            if axis is not None and axis[2] < 1:
                raise ValueError("axis count must be at least 1")
        return self

    def iter_points(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=float).reshape(-1, 3)
        gx, gy, gz = (np.linspace(lo, hi, int(n)) for lo, hi, n in (self.x, self.y, self.z))
        mesh = np.meshgrid(gx, gy, gz, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)


def tensor_grid_frame(
    spec: "CloakSpec",
    points: Iterable[Sequence[float]],
    alpha: TensorLike = None,
    beta: TensorLike = None,
) -> pd.DataFrame:
    """
    Tabulate the physical tensors over a set of points.

    Returns:
        DataFrame with columns x, y, z followed by the six entries of eps,
        mu and sigma
    """
    rows = []
    for point in points:
        p = np.asarray(point, dtype=float)
        material = physical_cloak_tensors(spec, p, alpha=alpha, beta=beta)
        row = {'x': p[0], 'y': p[1], 'z': p[2]}
        row.update(material.eps.as_row('eps'))
        row.update(material.mu.as_row('mu'))
        row.update(material.sigma.as_row('sigma'))
        rows.append(row)

    columns = ['x', 'y', 'z'] + [f"{p}_{e}" for p in ('eps', 'mu', 'sigma') for e in _ENTRIES]
    return pd.DataFrame(rows, columns=columns)
