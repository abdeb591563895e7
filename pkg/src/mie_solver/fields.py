"""
Far and near fields from multipole coefficients.

All evaluators work in the local frame of the coefficients and rotate the
result back, so one code path serves every incidence direction.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence

import numpy as np

from src.exceptions import DomainError, GridResolutionWarning, OverflowGuardError
from src.farnorms import SphereGrid, make_grid
from src.mie_solver.coefficients import (
    LayerAmplitudes,
    MultipoleCoefficients,
    NearFieldSample,
    mode_prefactor,
)
from src.specfun import pi_tau_table, psi_table, xi_table

SURFACE_TOLERANCE = 1e-4


def _to_local(points: np.ndarray, frame: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.asarray(points, dtype=float)) @ frame.T


def _to_global(vectors: np.ndarray, frame: np.ndarray) -> np.ndarray:
    return vectors @ frame


def _angles(local: np.ndarray):
    r = np.linalg.norm(local, axis=1)
    safe = np.where(r > 0, r, 1.0)
    cos_t = np.clip(local[:, 2] / safe, -1.0, 1.0)
    theta = np.arccos(cos_t)
    phi = np.arctan2(local[:, 1], local[:, 0])
    return r, theta, phi


def _basis(theta: np.ndarray, phi: np.ndarray):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct], axis=1)
    t_hat = np.stack([ct * cp, ct * sp, -st], axis=1)
    p_hat = np.stack([-sp, cp, np.zeros_like(phi)], axis=1)
    return r_hat, t_hat, p_hat


def _azimuthal(weights, phi):
    w1, w2 = weights
    return w1 * np.cos(phi) + w2 * np.sin(phi), w1 * np.sin(phi) - w2 * np.cos(phi)


def _assemble(theta, phi, rho, modes, k, mu, omega, weights, particular=0j):
    """
    Cartesian local E and H from Riccati combinations.

    Args:
        theta, phi: Local angles, shape (M,)
        rho: k r per point, shape (M,)
        modes: (U_TE, U_TE', U_TM, U_TM'), each of shape (N, M)
    """
    u_te, du_te, u_tm, du_tm = modes
    nmax = u_te.shape[0]
    n = np.arange(1, nmax + 1)[:, None]
    en = mode_prefactor(nmax)[:, None]
    pis, taus = pi_tau_table(nmax, np.cos(theta))
    pis, taus = pis[1:], taus[1:]
    C, S = _azimuthal(weights, phi)
    st = np.sin(theta)

    e_r = C * st * np.sum(en * n * (n + 1) * u_tm / rho ** 2 * pis, axis=0)
    e_t = C * np.sum(en * (u_te / rho * pis + du_tm / rho * taus), axis=0)
    e_p = -S * np.sum(en * (u_te / rho * taus + du_tm / rho * pis), axis=0)

    c_h = k / (1j * omega * mu)
    h_r = c_h * S * st * np.sum(en * n * (n + 1) * u_te / rho ** 2 * pis, axis=0)
    h_t = c_h * S * np.sum(en * (du_te / rho * taus - u_tm / rho * pis), axis=0)
    h_p = c_h * C * np.sum(en * (du_te / rho * pis - u_tm / rho * taus), axis=0)

    r_hat, t_hat, p_hat = _basis(theta, phi)
    E = e_r[:, None] * r_hat + e_t[:, None] * t_hat + e_p[:, None] * p_hat
    H = h_r[:, None] * r_hat + h_t[:, None] * t_hat + h_p[:, None] * p_hat
    if particular != 0:
        w1, w2 = weights
        E = E + particular * np.array([w1, w2, 0j])[None, :]
    return E, H


def _tables(z: complex, nmax: int, need_xi: bool = True):
    pv, pd, pl = psi_table(z, nmax)
    if np.any(pl != 0.0):
        raise OverflowGuardError(f"psi_n({z}) leaves the double range for n <= {nmax}")
    if not need_xi:
        return pv[1:], pd[1:], None, None
    xv, xd, xl = xi_table(z, nmax)
    if np.any(xl != 0.0):
        raise OverflowGuardError(f"xi_n({z}) leaves the double range for n <= {nmax}")
    return pv[1:], pd[1:], xv[1:], xd[1:]


def _per_radius(r: np.ndarray, k: complex, nmax: int, combine):
    """Evaluate ``combine(psi, psi', xi, xi')`` once per distinct radius."""
    radii, inverse = np.unique(r, return_inverse=True)
    out = [np.zeros((nmax, r.size), dtype=complex) for _ in range(4)]
    for i, radius in enumerate(radii):
        cols = inverse == i
        for slot, values in zip(out, combine(k * radius)):
            slot[:, cols] = values[:, None]
    return out


def _exterior_modes(coeffs: MultipoleCoefficients, omega: float, r: np.ndarray, with_incident: bool):
    a, b, nmax = coeffs.a, coeffs.b, coeffs.N

    def combine(x):
        pv, pd, xv, xd = _tables(x, nmax)
        u_te, du_te = -b * xv, -b * xd
        u_tm, du_tm = 1j * a * xv, 1j * a * xd
        if with_incident:
            u_te, du_te = u_te + pv, du_te + pd
            u_tm, du_tm = u_tm - 1j * pv, du_tm - 1j * pd
        return u_te, du_te, u_tm, du_tm

    return _per_radius(r, omega, nmax, combine)


def _interior_modes(layer: LayerAmplitudes, omega: float, r: np.ndarray):
    k = layer.shell.wavenumber(omega)
    nmax = layer.te_A.size
    core = layer.inner_radius == 0.0

    def combine(z):
        pv, pd, xv, xd = _tables(z, nmax, need_xi=not core)
        if core:
            return layer.te_A * pv, layer.te_A * pd, layer.tm_A * pv, layer.tm_A * pd
        return (layer.te_A * pv + layer.te_B * xv, layer.te_A * pd + layer.te_B * xd,
                layer.tm_A * pv + layer.tm_B * xv, layer.tm_A * pd + layer.tm_B * xd)

    return _per_radius(r, k, nmax, combine)


def scattered_fields(coeffs: MultipoleCoefficients, omega: float, points) -> tuple[np.ndarray, np.ndarray]:
    """
    Scattered E and H at points outside the scatterer.

    Raises:
        DomainError: a point lies inside the sphere
    """
    local = _to_local(points, coeffs.frame)
    r, theta, phi = _angles(local)
    inner = coeffs.sphere.radius if coeffs.sphere is not None else 0.0
    if np.any(r <= 0.0) or np.any(r < inner * (1 - 1e-12)):
        raise DomainError(f"scattered fields need |x| >= {inner}, got min |x| = {r.min()}")
    modes = _exterior_modes(coeffs, omega, r, with_incident=False)
    E, H = _assemble(theta, phi, omega * r, modes, omega, 1.0, omega, coeffs.weights)
    return _to_global(E, coeffs.frame), _to_global(H, coeffs.frame)


def incident_fields(src, omega: float, points) -> tuple[np.ndarray, np.ndarray]:
    """Incident E = pol exp(i omega khat . x), H = khat x E; zero for sources without an incident wave."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if src is None or src.kind != "plane-wave":
        zero = np.zeros(points.shape, dtype=complex)
        return zero, zero.copy()
    khat = src.direction
    phase = np.exp(1j * omega * points @ khat)
    E = phase[:, None] * src.pol[None, :]
    H = np.cross(khat[None, :], E)
    return E, H


def evaluate_fields(coeffs: MultipoleCoefficients, omega: float, points, layer: Optional[int] = None):
    """
    Total fields from the multipole expansions.

    ``layer`` forces one expansion for every point: an interior index, or
    ``len(coeffs.interior)`` for the exterior. Without it the region is
    picked from |x|. Outside, plane-wave solves include the incident
    expansion.
    """
    if coeffs.interior is None:
        raise DomainError("interior amplitudes were not retained for this solve")
    local = _to_local(points, coeffs.frame)
    r, theta, phi = _angles(local)
    layers = coeffs.interior
    if layer is None:
        edges = np.array([l.outer_radius for l in layers])
        index = np.searchsorted(edges, r, side="left")
    else:
        index = np.full(r.shape, int(layer))

    E = np.zeros((r.size, 3), dtype=complex)
    H = np.zeros((r.size, 3), dtype=complex)
    for l in np.unique(index):
        cols = index == l
        if l >= len(layers):
            modes = _exterior_modes(coeffs, omega, r[cols], with_incident=coeffs.kind == "plane-wave")
            e, h = _assemble(theta[cols], phi[cols], omega * r[cols], modes, omega, 1.0, omega, coeffs.weights)
        else:
            amp = layers[l]
            k = amp.shell.wavenumber(omega)
            modes = _interior_modes(amp, omega, r[cols])
            e, h = _assemble(theta[cols], phi[cols], k * r[cols], modes, k, amp.mu, omega,
                             coeffs.weights, amp.particular)
        E[cols], H[cols] = e, h
    return _to_global(E, coeffs.frame), _to_global(H, coeffs.frame)


# ============================================================================
# Far field
# ============================================================================

def far_field_grid(coeffs: MultipoleCoefficients, omega: float, directions) -> np.ndarray:
    """Far-field amplitude A(xhat) for each row of ``directions``; shape (M, 3)."""
    local = _to_local(directions, coeffs.frame)
    _, theta, phi = _angles(local)
    nmax = coeffs.N
    n = np.arange(1, nmax + 1)[:, None]
    pis, taus = pi_tau_table(nmax, np.cos(theta))
    pis, taus = pis[1:], taus[1:]
    factor = (2 * n + 1) / (n * (n + 1))
    a, b = coeffs.a[:, None], coeffs.b[:, None]
    s1 = np.sum(factor * (a * pis + b * taus), axis=0)
    s2 = np.sum(factor * (a * taus + b * pis), axis=0)
    C, S = _azimuthal(coeffs.weights, phi)
    _, t_hat, p_hat = _basis(theta, phi)
    A = (1j / omega) * ((C * s2)[:, None] * t_hat - (S * s1)[:, None] * p_hat)
    return _to_global(A, coeffs.frame)


def far_field(coeffs: MultipoleCoefficients, omega: float, xhat) -> np.ndarray:
    """
    Scattering amplitude: E_s(x) ~ exp(i omega |x|) / |x| * A(xhat).

    Example:
        >>> far_field(zero_coeffs, 1.0, [0, 0, 1])
        array([0.+0.j, 0.+0.j, 0.+0.j])
    """
    xhat = np.asarray(xhat, dtype=float)
    return far_field_grid(coeffs, omega, (xhat / np.linalg.norm(xhat))[None, :])[0]


# ============================================================================
# Surface traces
# ============================================================================

def default_trace_grid(nmax: int, omega: float, R: float) -> SphereGrid:
    n_polar = max(32, 2 * nmax + 16, int(math.ceil(2.0 * omega * R)) + 16)
    return make_grid(n_polar, 2 * n_polar)


def near_field_trace(
    coeffs: MultipoleCoefficients,
    incident,
    omega: float,
    R: float,
    grid: Optional[SphereGrid] = None,
) -> list[NearFieldSample]:
    """
    Tangential fields on the sphere of radius R.

    Samples hold the scattered field plus the incident one when ``incident``
    is given; ``weight`` is the surface quadrature weight R^2 w.

    Raises:
        DomainError: R does not exceed the outermost shell radius
    """
    outer = coeffs.sphere.radius if coeffs.sphere is not None else 0.0
    if not R > outer:
        raise DomainError(f"trace radius {R} must exceed the scatterer radius {outer}")
    grid = grid or default_trace_grid(coeffs.N, omega, R)
    points = R * grid.nodes
    E, H = scattered_fields(coeffs, omega, points)
    if incident is not None:
        Ei, Hi = incident_fields(incident, omega, points)
        E, H = E + Ei, H + Hi
    nu = grid.nodes
    E = E - np.sum(E * nu, axis=1)[:, None] * nu
    H = H - np.sum(H * nu, axis=1)[:, None] * nu
    return [
        NearFieldSample(point=points[j], e_tan=E[j], h_tan=H[j], weight=float(R ** 2 * grid.weights[j]))
        for j in range(points.shape[0])
    ]


def far_field_via_surface_integral(
    samples: Sequence[NearFieldSample],
    omega: float,
    xhat,
    reference: Optional[MultipoleCoefficients] = None,
) -> np.ndarray:
    """
    Far field from scattered traces by the Stratton-Chu representation
    (i omega / 4 pi) xhat x sum_j w_j [nu x E + (nu x H) x xhat] exp(-i omega xhat . y).

    With ``reference`` the result is compared with the coefficient route and
    a GridResolutionWarning is emitted when they differ by more than 1e-4.
    """
    xhat = np.asarray(xhat, dtype=float)
    xhat = xhat / np.linalg.norm(xhat)
    if not samples:
        return np.zeros(3, dtype=complex)
    points = np.array([s.point for s in samples])
    nu = points / np.linalg.norm(points, axis=1)[:, None]
    E = np.array([s.e_tan for s in samples])
    H = np.array([s.h_tan for s in samples])
    w = np.array([s.weight for s in samples])
    phase = np.exp(-1j * omega * points @ xhat)
    integrand = np.cross(nu, E) + np.cross(np.cross(nu, H), xhat[None, :])
    total = np.sum((w * phase)[:, None] * integrand, axis=0)
    A = (1j * omega / (4 * np.pi)) * np.cross(xhat, total)

    if reference is not None:
        expected = far_field(reference, omega, xhat)
        scale = max(np.linalg.norm(expected), np.linalg.norm(A))
        if scale > 0 and np.linalg.norm(A - expected) > SURFACE_TOLERANCE * scale:
            warnings.warn(
                f"surface-integral far field differs from the coefficient route by "
                f"{np.linalg.norm(A - expected) / scale:.2e} (relative); refine the grid",
                GridResolutionWarning,
                stacklevel=2,
            )
    return A
