"""Quadrature grids on the unit sphere and norms of far-field patterns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import pandas as pd

REFINE_RTOL = 1e-6
REFINE_MAX_PASSES = 40


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre in cos(theta) times uniform phi; nodes are polar-major."""

    nodes: np.ndarray
    weights: np.ndarray
    n_polar: int
    n_azimuth: int
    theta: np.ndarray
    phi: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)


def make_grid(n_polar: int, n_azimuth: int) -> SphereGrid:
    """
    Product quadrature on the unit sphere.

    Args:
        n_polar: Gauss-Legendre nodes in cos(theta), at least 8
        n_azimuth: Uniform nodes in phi, at least 16

    Returns:
        SphereGrid whose weights sum to 4 pi
    """
    if n_polar < 8 or n_azimuth < 16:
        raise ValueError(f"grid too small: n_polar={n_polar} (>= 8), n_azimuth={n_azimuth} (>= 16)")
    mu, w_mu = np.polynomial.legendre.leggauss(int(n_polar))
    theta = np.arccos(mu)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    st = np.sin(tt)
    nodes = np.stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)], axis=-1).reshape(-1, 3)
    weights = np.repeat(w_mu, n_azimuth) * (2.0 * np.pi / n_azimuth)
    return SphereGrid(nodes=nodes, weights=weights, n_polar=int(n_polar),
                      n_azimuth=int(n_azimuth), theta=theta, phi=phi)


@dataclass(frozen=True)
class FarFieldPattern:
    """Far-field values on a grid; ``evaluator`` maps directions (M, 3) to values (M, 3)."""

    grid: SphereGrid
    values: np.ndarray
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def max_radial_component(self) -> float:
        return float(np.max(np.abs(np.sum(self.values * self.grid.nodes, axis=1)), initial=0.0))


def pattern_from_coefficients(coeffs, omega: float, grid: SphereGrid) -> FarFieldPattern:
    """Far-field pattern of a solve, with an evaluator for sup-norm refinement."""
    from src.mie_solver.fields import far_field_grid

    def evaluator(directions):
        return far_field_grid(coeffs, omega, directions)

    return FarFieldPattern(grid=grid, values=evaluator(grid.nodes), evaluator=evaluator)


def _directions(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def sup_norm(p: FarFieldPattern) -> float:
    """
    Largest |A| over the sphere.

    Without an evaluator this is the maximum over the grid nodes. With one,
    a 7x7 patch is sampled around the best direction found so far. The patch
    follows the maximum while it sits on the patch edge, shrinks by three
    otherwise, and refinement stops once a shrunken patch improves the
    maximum by less than 1e-6 (relative).
    """
    mags = p.magnitudes()
    if mags.size == 0:
        return 0.0
    best = int(np.argmax(mags))
    value = float(mags[best])
    if p.evaluator is None or value == 0.0:
        return value

    grid = p.grid
    theta0 = grid.theta[best // grid.n_azimuth]
    phi0 = grid.phi[best % grid.n_azimuth]
    h_theta = np.pi / grid.n_polar / 3.0
    h_phi = 2.0 * np.pi / grid.n_azimuth / 3.0
    offsets = np.linspace(-1.0, 1.0, 7)
    shrunk = False

    for _ in range(REFINE_MAX_PASSES):
        tt, pp = np.meshgrid(np.clip(theta0 + h_theta * offsets, 0.0, np.pi),
                             phi0 + h_phi * offsets, indexing="ij")
        dirs = _directions(tt.ravel(), pp.ravel())
        local = np.linalg.norm(p.evaluator(dirs), axis=1)
        i = int(np.argmax(local))
        candidate = float(local[i])
        change = 0.0
        on_edge = False
        if candidate > value:
            change = (candidate - value) / candidate
            value = candidate
            theta0, phi0 = tt.ravel()[i], pp.ravel()[i]
            row, col = divmod(i, offsets.size)
            on_edge = row in (0, offsets.size - 1) or col in (0, offsets.size - 1)
        if on_edge:
            continue
        if shrunk and change < REFINE_RTOL:
            break
        h_theta /= 3.0
        h_phi /= 3.0
        shrunk = True
    return value


def l2_norm(p: FarFieldPattern) -> float:
    """sqrt of the quadrature of |A|^2 over the sphere."""
    return float(np.sqrt(np.sum(p.grid.weights * p.magnitudes() ** 2)))


def pattern_frame(p: FarFieldPattern) -> pd.DataFrame:
    """Tabulate a pattern by its spherical tangent components, polar-major."""
    tt, pp = np.meshgrid(p.grid.theta, p.grid.phi, indexing="ij")
    theta, phi = tt.ravel(), pp.ravel()
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    theta_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phi_hat = np.stack([-sp, cp, np.zeros_like(phi)], axis=-1)
    a_theta = np.sum(p.values * theta_hat, axis=1)
    a_phi = np.sum(p.values * phi_hat, axis=1)
    return pd.DataFrame({
        'theta': theta,
        'phi': phi,
        'e_theta_re': a_theta.real,
        'e_theta_im': a_theta.imag,
        'e_phi_re': a_phi.real,
        'e_phi_im': a_phi.imag,
        'magnitude': p.magnitudes(),
    })
