"""Energy bookkeeping: absorption, boundary flux and cross sections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from src.config import SolverConfig
from src.exceptions import DomainError
from src.mie_solver.coefficients import LayerAmplitudes, MultipoleCoefficients, mode_prefactor
from src.mie_solver.fields import (
    default_trace_grid,
    far_field,
    incident_fields,
    near_field_trace,
)
from src.specfun import psi_table, xi_table


@dataclass(frozen=True)
class EnergyBalance:
    """
    Both sides of the energy identity on a ball B_R around the scatterer.

    ``absorbed`` is the ohmic (and magnetic) loss inside the sphere;
    ``flux_rhs`` is minus the real boundary flux of the scattered and
    cross terms minus Re of the source work.
    When no shell is lossy and no current flows, both sides vanish
    identically; ``lossless`` is set and ``residual`` is the absolute gap.
    """

    absorbed: float
    flux_rhs: float
    residual: float
    boundary_flux: float
    source_work: float
    radius: float
    lossless: bool = False


@dataclass(frozen=True)
class CrossSections:
    sca: float
    ext: float
    abs: float


def _mode_sums(R, T, S, n):
    """Angular integral of |field|^2 for radial (R), N-tangential (T) and M-tangential (S) parts."""
    radial = 2 * np.pi * n * (n + 1) / (2 * n + 1)
    tangential = 2 * np.pi * n ** 2 * (n + 1) ** 2 / (2 * n + 1)
    return float(np.sum(radial * np.abs(R) ** 2 + tangential * (np.abs(T) ** 2 + np.abs(S) ** 2)))


def _layer_integrand(layer: LayerAmplitudes, omega: float, is_source: bool):
    k = layer.shell.wavenumber(omega)
    nmax = layer.te_A.size
    n = np.arange(1, nmax + 1)
    en = mode_prefactor(nmax)
    core = layer.inner_radius == 0.0
    c_h = k / (1j * omega * layer.mu)
    loss_e = omega * complex(layer.eps).imag
    loss_h = omega * complex(layer.mu).imag

    def integrand(r):
        z = k * r
        pv, pd, _ = psi_table(z, nmax)
        pv, pd = pv[1:], pd[1:]
        if core:
            u_te, du_te, u_tm, du_tm = layer.te_A * pv, layer.te_A * pd, layer.tm_A * pv, layer.tm_A * pd
        else:
            xv, xd, _ = xi_table(z, nmax)
            xv, xd = xv[1:], xd[1:]
            u_te = layer.te_A * pv + layer.te_B * xv
            du_te = layer.te_A * pd + layer.te_B * xd
            u_tm = layer.tm_A * pv + layer.tm_B * xv
            du_tm = layer.tm_A * pd + layer.tm_B * xd

        R = en * n * (n + 1) * u_tm / z ** 2
        T = en * du_tm / z
        S = en * u_te / z
        if layer.particular != 0:
            R = R.copy()
            T = T.copy()
            R[0] += layer.particular
            T[0] += layer.particular
        e2 = _mode_sums(R, T, S, n)
        h2 = _mode_sums(c_h * en * n * (n + 1) * u_te / z ** 2, c_h * en * du_te / z, c_h * en * u_tm / z, n)

        work = 0j
        if is_source:
            # int E . x' dOmega for the order-1 part
            work = 4 * np.pi / 3 * R[0] + 8 * np.pi / 3 * T[0]
        return np.array([loss_e * e2 + loss_h * h2, work.real, work.imag]) * r ** 2

    return integrand


def energy_balance(
    sphere,
    omega: float,
    src,
    coeffs: MultipoleCoefficients,
    config: Optional[SolverConfig] = None,
    radius_factor: float = 1.3,
) -> EnergyBalance:
    """
    Check absorbed power against the boundary flux and source work.

    Absorption is integrated radially per lossy shell with adaptive
    Gauss-Kronrod on analytic angular integrals; the flux uses Gauss-Legendre
    samples of the tangential fields on a sphere of ``radius_factor`` times
    the outer radius.

    Raises:
        DomainError: the solve kept no interior amplitudes
    """
    cfg = config or SolverConfig()
    if coeffs.interior is None:
        raise DomainError("energy balance needs the interior amplitudes of the solve")
    scale = coeffs.weight_norm2

    absorbed = 0.0
    work = 0j
    for l, layer in enumerate(coeffs.interior):
        is_source = l in coeffs.source_layers
        if not (layer.shell.is_lossy or is_source):
            continue
        f = _layer_integrand(layer, omega, is_source)
        total, _ = quad_vec(f, layer.inner_radius, layer.outer_radius,
                            epsrel=cfg.energy_rtol, epsabs=0.0, limit=400)
        absorbed += scale * float(total[0])
        work += scale * complex(total[1], total[2])

    outer = coeffs.sphere.radius if coeffs.sphere is not None else sphere.radius
    R = radius_factor * outer
    grid = default_trace_grid(coeffs.N, omega, R)
    samples = near_field_trace(coeffs, None, omega, R, grid)
    points = np.array([s.point for s in samples])
    nu = points / R
    Es = np.array([s.e_tan for s in samples])
    Hs = np.array([s.h_tan for s in samples])
    Ei, Hi = incident_fields(src, omega, points)
    density = (np.cross(Es, np.conj(Hs)) + np.cross(Ei, np.conj(Hs)) + np.cross(Es, np.conj(Hi)))
    weights = np.array([s.weight for s in samples])
    flux = float(np.real(np.sum(weights * np.sum(density * nu, axis=1))))

    rhs = -flux - work.real
    lossless = not coeffs.source_layers and not any(layer.shell.is_lossy for layer in coeffs.interior)
    if lossless:
        denominator = 1.0
    else:
        denominator = max(abs(absorbed), abs(rhs), omega * np.finfo(float).tiny)
    return EnergyBalance(
        absorbed=absorbed,
        flux_rhs=rhs,
        residual=abs(absorbed - rhs) / denominator,
        boundary_flux=flux,
        source_work=work.real,
        radius=R,
        lossless=lossless,
    )


def extinction_from_coefficients(coeffs: MultipoleCoefficients, omega: float) -> float:
    """Extinction per unit incident intensity from the coefficient sum."""
    n = coeffs.orders
    return float(2 * np.pi / omega ** 2 * np.sum((2 * n + 1) * (coeffs.a + coeffs.b).real))


def cross_sections(coeffs: MultipoleCoefficients, omega: float, incident=None) -> CrossSections:
    """
    Scattering, extinction (from the forward amplitude) and absorption
    cross sections of a plane-wave solve.

    Without ``incident`` the direction and polarization are read from the
    coefficient frame and weights.
    """
    n = coeffs.orders
    sca = float(2 * np.pi / omega ** 2 * np.sum((2 * n + 1) * (np.abs(coeffs.a) ** 2 + np.abs(coeffs.b) ** 2)))
    if incident is not None:
        khat, pol = incident.direction, incident.pol
    else:
        w1, w2 = coeffs.weights
        khat = coeffs.frame[2]
        pol = w1 * coeffs.frame[0] + w2 * coeffs.frame[1]
    norm2 = float(np.real(np.vdot(pol, pol)))
    if norm2 == 0.0:
        return CrossSections(sca=0.0, ext=0.0, abs=0.0)
    forward = far_field(coeffs, omega, khat)
    ext = float(4 * np.pi / omega * np.imag(np.dot(forward, np.conj(pol))) / norm2)
    return CrossSections(sca=sca, ext=ext, abs=ext - sca)
