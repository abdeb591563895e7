"""
Multipole solves for a radially stratified sphere in vacuum.

Three excitations are supported: plane waves, constant-density currents in
a single shell (which only excite order 1), and a prescribed tangential
electric trace on a sphere. Interface recursions run on logarithmic
derivatives and psi/xi ratios; raw Riccati values are only used inside one
layer when the interior amplitudes are reconstructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.config import SolverConfig
from src.exceptions import (
    CutoffError,
    OverflowGuardError,
    PassivityError,
    ResonanceDivisionError,
    UnsupportedSourceError,
)
from src.mie_solver.coefficients import (
    LayerAmplitudes,
    LayeredSphere,
    MultipoleCoefficients,
    mode_prefactor,
)
from src.specfun import (
    log_derivatives,
    psi_ratio,
    psi_table,
    psi_xi_ratio,
    xi_ratio,
    xi_table,
)

_TINY = 1e-300


def wiscombe_cutoff(x: float) -> int:
    """N = ceil(x + 4.05 x^(1/3) + 2), floored at 4."""
    x = abs(x)
    return max(4, int(math.ceil(x + 4.05 * x ** (1.0 / 3.0) + 2.0)))


# ============================================================================
# Frames
# ============================================================================

def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _perpendicular(e: np.ndarray) -> np.ndarray:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(e)))] = 1.0
    return _unit(np.cross(e, axis))


def frame_from_plane_wave(src) -> tuple[np.ndarray, tuple[complex, complex]]:
    """Local frame with e3 along khat and e1 along Re(pol), or Im(pol) when that vanishes."""
    e3 = _unit(src.direction)
    pol = src.pol
    seed = pol.real if np.linalg.norm(pol.real) > 1e-14 * np.linalg.norm(pol) else pol.imag
    e1 = _unit(seed - np.dot(seed, e3) * e3)
    e2 = np.cross(e3, e1)
    frame = np.vstack([e1, e2, e3])
    return frame, (complex(np.dot(pol, e1)), complex(np.dot(pol, e2)))


def frame_from_current(J) -> tuple[np.ndarray, tuple[complex, complex]]:
    """Local frame whose e1, e2 span Re(J) and Im(J)."""
    J = np.asarray(J, dtype=complex)
    re, im = J.real, J.imag
    if np.linalg.norm(re) > 0:
        e1, other = _unit(re), im
    elif np.linalg.norm(im) > 0:
        e1, other = _unit(im), re
    else:
        return np.eye(3), (0j, 0j)
    rest = other - np.dot(other, e1) * e1
    if np.linalg.norm(rest) > 1e-12 * np.linalg.norm(J):
        e2 = _unit(rest)
    else:
        e2 = _perpendicular(e1)
    e3 = np.cross(e1, e2)
    frame = np.vstack([e1, e2, e3])
    return frame, (complex(np.dot(J, e1)), complex(np.dot(J, e2)))


# ============================================================================
# Riccati helpers
# ============================================================================

def _raw(z: complex, nmax: int, safe_band: float, need_xi: bool = True):
    """Unscaled psi, psi', xi, xi' for n = 0..nmax."""
    pv, pd, pl = psi_table(z, nmax, safe_band)
    if np.any(pl != 0.0):
        raise OverflowGuardError(f"psi_n({z}) leaves the double range for n <= {nmax}")
    if not need_xi:
        return pv, pd, None, None
    xv, xd, xl = xi_table(z, nmax, safe_band)
    if np.any(xl != 0.0):
        raise OverflowGuardError(f"xi_n({z}) leaves the double range for n <= {nmax}")
    return pv, pd, xv, xd


def _psi_over_xi(z: complex, nmax: int, safe_band: float) -> np.ndarray:
    pv, _, pl = psi_table(z, nmax, safe_band)
    xv, _, xl = xi_table(z, nmax, safe_band)
    with np.errstate(over="ignore", under="ignore"):
        return pv / xv * np.exp(pl - xl)


@dataclass(frozen=True)
class _LayerSweep:
    """B/A ratios of one layer for TE and TM, indexed n = 0..nmax."""

    beta_te: np.ndarray
    beta_tm: np.ndarray


@dataclass(frozen=True)
class _Surface:
    """
    Admittance-weighted log-derivatives Lambda at the outer surface, split as
    Lambda = c (n+1)/x - Y g2 + Y shift with Y the admittance of the outermost
    shell, c = 1/mu (TE) or 1/eps (TM) and g2 = psi_{n+1}/psi_n at its
    outer argument, so that Lambda - D1(x) keeps its digits at weak contrast.
    """

    mu: complex
    eps: complex
    g2: np.ndarray
    te_admittance: complex
    tm_admittance: complex
    shift_te: np.ndarray
    shift_tm: np.ndarray


def _forward_sweep(sphere: LayeredSphere, omega: float, nmax: int, safe_band: float):
    """
    Propagate the continuous log-derivatives from the centre outwards.

    Returns:
        (_Surface, sweeps)
    """
    n = np.arange(nmax + 1)
    lam_te = lam_tm = None
    sweeps = []
    for i, shell in enumerate(sphere.shells):
        k = shell.wavenumber(omega)
        z2 = k * shell.outer_radius
        d1_long, d3_long = log_derivatives(z2, nmax + 1)
        d1_2, d3_2 = d1_long[:nmax + 1], d3_long[:nmax + 1]
        # D1 = (n+1)/z - g, D3 = -n/z + h
        g2 = psi_ratio(z2, nmax, d1_long)
        h2 = 1.0 / xi_ratio(z2, nmax)
        if i == 0:
            zero = np.zeros(nmax + 1, dtype=complex)
            d_te = d_tm = d1_2
            shift_te = shift_tm = zero
            sweeps.append(_LayerSweep(zero, zero))
        else:
            z1 = k * sphere.inner_radius(i)
            d1_1, d3_1 = log_derivatives(z1, nmax)
            q = psi_xi_ratio(z1, z2, nmax, (d1_1, d3_1), (d1_2, d3_2))
            ratio1 = _psi_over_xi(z1, nmax, safe_band)
            outs, shifts, betas = [], [], []
            for lam, admittance in ((lam_te, shell.te_admittance), (lam_tm, shell.tm_admittance)):
                target = lam / admittance
                frac = (d1_1 - target) / (d3_1 - target)
                betas.append(-ratio1 * frac)
                shifted = -q * frac
                outs.append((d1_2 + shifted * d3_2) / (1.0 + shifted))
                shifts.append(shifted * (h2 + g2 - (2 * n + 1) / z2) / (1.0 + shifted))
            d_te, d_tm = outs
            shift_te, shift_tm = shifts
            sweeps.append(_LayerSweep(*betas))
        lam_te = shell.te_admittance * d_te
        lam_tm = shell.tm_admittance * d_tm

    outer = sphere.shells[-1]
    surface = _Surface(
        mu=complex(outer.mu), eps=complex(outer.eps), g2=g2,
        te_admittance=outer.te_admittance, tm_admittance=outer.tm_admittance,
        shift_te=shift_te, shift_tm=shift_tm,
    )
    return surface, sweeps


def _exterior_from_log_derivatives(surface: _Surface, x: float, nmax: int, safe_band: float):
    n = np.arange(nmax + 1)
    g = psi_ratio(x, nmax)
    h = 1.0 / xi_ratio(x, nmax)
    ratio = _psi_over_xi(x, nmax, safe_band)
    out = []
    for medium, admittance, shift in ((surface.mu, surface.te_admittance, surface.shift_te),
                                      (surface.eps, surface.tm_admittance, surface.shift_tm)):
        # Lambda - D1(x) and Lambda - D3(x) with the (n+1)/x parts combined first;
        # g - g2 is exactly zero for a vacuum outer shell
        c_minus_one = (1.0 - medium) / medium
        rem = (g - admittance * surface.g2) + admittance * shift
        num = c_minus_one * (n + 1) / x + rem
        den = ((c_minus_one + 1.0) * (n + 1) + n) / x + admittance * (shift - surface.g2) - h
        out.append(ratio * num / den)
    b, a = out
    return a[1:], b[1:]


def _fit_amplitude(c1, t1, s1, c2, t2, s2):
    """Least-squares amplitude for two consistent scalar equations c_i A = t_i, rows scaled by s_i."""
    s1 = np.maximum(s1, _TINY)
    s2 = np.maximum(s2, _TINY)
    h1, h2 = c1 / s1, c2 / s2
    return (np.conj(h1) * t1 / s1 + np.conj(h2) * t2 / s2) / (np.abs(h1) ** 2 + np.abs(h2) ** 2)


def _interior_march(sphere, omega, a, b, sweeps, nmax, safe_band):
    """Recover (A, B) per layer from the outside in, one interface at a time."""
    n = slice(1, nmax + 1)
    x = omega * sphere.radius
    pv, pd, xv, xd = _raw(x, nmax, safe_band)
    u_te, du_te = pv[n] - b * xv[n], pd[n] - b * xd[n]
    u_tm, du_tm = -1j * (pv[n] - a * xv[n]), -1j * (pd[n] - a * xd[n])
    # continuous pairs: TE (U/k, U'/mu), TM (U'/k, U/mu)
    f_te, g_te = u_te / omega, du_te
    f_tm, g_tm = du_tm / omega, u_tm

    layers = []
    for i in range(len(sphere.shells) - 1, -1, -1):
        shell = sphere.shells[i]
        k, mu = shell.wavenumber(omega), shell.mu
        sweep = sweeps[i]
        core = i == 0
        pv, pd, xv, xd = _raw(k * shell.outer_radius, nmax, safe_band, need_xi=not core)
        if core:
            phi_te = phi_tm = pv[n]
            dphi_te = dphi_tm = pd[n]
            size_te = size_tm = np.abs(pv[n])
            dsize_te = dsize_tm = np.abs(pd[n])
        else:
            bt, bm = sweep.beta_te[n], sweep.beta_tm[n]
            phi_te, dphi_te = pv[n] + bt * xv[n], pd[n] + bt * xd[n]
            phi_tm, dphi_tm = pv[n] + bm * xv[n], pd[n] + bm * xd[n]
            size_te = np.abs(pv[n]) + np.abs(bt * xv[n])
            dsize_te = np.abs(pd[n]) + np.abs(bt * xd[n])
            size_tm = np.abs(pv[n]) + np.abs(bm * xv[n])
            dsize_tm = np.abs(pd[n]) + np.abs(bm * xd[n])

        A_te = _fit_amplitude(phi_te / k, f_te, size_te / abs(k), dphi_te / mu, g_te, dsize_te / abs(mu))
        A_tm = _fit_amplitude(dphi_tm / k, f_tm, dsize_tm / abs(k), phi_tm / mu, g_tm, size_tm / abs(mu))
        B_te = np.zeros_like(A_te) if core else A_te * sweep.beta_te[n]
        B_tm = np.zeros_like(A_tm) if core else A_tm * sweep.beta_tm[n]
        layers.append(LayerAmplitudes(
            inner_radius=sphere.inner_radius(i),
            outer_radius=shell.outer_radius,
            eps=complex(shell.eps), mu=complex(shell.mu),
            te_A=A_te, te_B=B_te, tm_A=A_tm, tm_B=B_tm,
        ))

        if not core:
            pv, pd, xv, xd = _raw(k * sphere.inner_radius(i), nmax, safe_band)
            u_te, du_te = A_te * pv[n] + B_te * xv[n], A_te * pd[n] + B_te * xd[n]
            u_tm, du_tm = A_tm * pv[n] + B_tm * xv[n], A_tm * pd[n] + B_tm * xd[n]
            f_te, g_te = u_te / k, du_te / mu
            f_tm, g_tm = du_tm / k, u_tm / mu

    return tuple(reversed(layers))


# ============================================================================
# Plane wave
# ============================================================================

def _passivity_check(sphere: LayeredSphere, a, b, omega, tolerance):
    """Extinction must cover scattering; lossless spheres absorb nothing and are skipped."""
    if not any(shell.is_lossy for shell in sphere.shells):
        return
    n = np.arange(1, a.size + 1)
    prefactor = 2.0 * np.pi / omega ** 2
    ext = prefactor * float(np.sum((2 * n + 1) * (a + b).real))
    sca = prefactor * float(np.sum((2 * n + 1) * (np.abs(a) ** 2 + np.abs(b) ** 2)))
    # Re a - |a|^2 is a difference of nearly equal terms for weak absorbers
    slack = (max(tolerance, 1e-10) * max(abs(ext), sca)
             + 1e-12 * prefactor * float(np.sum((2 * n + 1) * (np.abs(a) + np.abs(b)))))
    if ext - sca < -slack:
        raise PassivityError(f"negative absorption: ext={ext:.6e}, sca={sca:.6e}")


def plane_wave_solve(
    sphere: LayeredSphere,
    omega: float,
    src,
    config: Optional[SolverConfig] = None,
    keep_interior: bool = True,
) -> MultipoleCoefficients:
    """
    Scattering of a plane wave by a layered sphere.

    The cutoff starts at the Wiscombe estimate and grows until the last
    coefficient pair is below ``tail_tolerance`` relative to the largest.

    Args:
        sphere: Layered sphere in vacuum
        omega: Angular frequency
        src: PlaneWave
        config: Numerical settings; defaults if omitted
        keep_interior: Reconstruct the interior amplitudes as well

    Returns:
        MultipoleCoefficients with interior amplitudes retained

    Raises:
        CutoffError: tail decay not reached by n_max
        PassivityError: coefficients imply negative absorption
    """
    cfg = config or SolverConfig()
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    frame, weights = frame_from_plane_wave(src)
    x = omega * sphere.radius

    nstop = wiscombe_cutoff(x)
    if nstop > cfg.n_max:
        raise CutoffError(f"size parameter {x:.4g} needs N = {nstop} > N_max = {cfg.n_max}")
    while True:
        surface, sweeps = _forward_sweep(sphere, omega, nstop, cfg.im_safe_band)
        a, b = _exterior_from_log_derivatives(surface, x, nstop, cfg.im_safe_band)
        size = np.abs(a) + np.abs(b)
        top = float(size.max())
        if top == 0.0 or size[-1] < cfg.tail_tolerance * top:
            break
        if nstop >= cfg.n_max:
            raise CutoffError(
                f"tail |a_N|+|b_N| = {size[-1]:.3e} not below {cfg.tail_tolerance:.1e} x max at N_max = {cfg.n_max}")
        nstop = min(cfg.n_max, nstop + max(2, nstop // 4))

    _passivity_check(sphere, a, b, omega, cfg.passivity_tolerance)

    interior = None
    if keep_interior:
        interior = _interior_march(sphere, omega, a, b, sweeps, nstop, cfg.im_safe_band)

    return MultipoleCoefficients(
        a=a, b=b, frame=frame, weights=weights, kind="plane-wave",
        sphere=sphere, interior=interior,
    )


# ============================================================================
# Order-1 currents
# ============================================================================

def _source_layers(sphere: LayeredSphere, r_in: float, r_out: float, rtol: float = 1e-12) -> tuple[int, ...]:
    found = []
    for i, shell in enumerate(sphere.shells):
        lo, hi = sphere.inner_radius(i), shell.outer_radius
        if lo >= r_in * (1 - rtol) and hi <= r_out * (1 + rtol):
            found.append(i)
    return tuple(found)


def current_n1_solve(
    sphere: LayeredSphere,
    omega: float,
    src,
    config: Optional[SolverConfig] = None,
) -> MultipoleCoefficients:
    """
    Field of a constant current density on a ball or shell inside the sphere.

    Inside the source the particular solution E_p = -i J / (omega eps), H_p = 0
    is added; homogeneous order-1 TM expansions in every region are matched
    with the jump of E_p at the source boundary.

    Raises:
        UnsupportedSourceError: support straddles a material interface or
            leaves the sphere
        OverflowGuardError: order-1 Riccati values leave the double range
    """
    cfg = config or SolverConfig()
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    r_in, r_out = float(src.r_in), float(src.r_out)
    rtol = 1e-12
    if r_out > sphere.radius * (1 + rtol):
        raise UnsupportedSourceError(
            f"source radius {r_out} lies outside the sphere of radius {sphere.radius}")
    for radius in sphere.radii[:-1]:
        if r_in * (1 + rtol) < radius < r_out * (1 - rtol):
            raise UnsupportedSourceError(
                f"source support [{r_in}, {r_out}] straddles the interface at r = {radius}")

    split = sphere.split([r for r in (r_in, r_out) if r > 0])
    sources = _source_layers(split, r_in, r_out)
    frame, weights = frame_from_current(src.J)
    L = len(split.shells)
    E1 = complex(mode_prefactor(1)[0])

    def col_a(l):
        return 0 if l == 0 else 2 * l - 1

    def col_b(l):
        return 2 * l

    matrix = np.zeros((2 * L, 2 * L), dtype=complex)
    rhs = np.zeros(2 * L, dtype=complex)
    particular = [(-1j / (omega * complex(s.eps)) if i in sources else 0j)
                  for i, s in enumerate(split.shells)]

    for j, shell in enumerate(split.shells):
        R = shell.outer_radius
        k_in, mu_in = shell.wavenumber(omega), complex(shell.mu)
        pv, pd, xv, xd = _raw(k_in * R, 1, cfg.im_safe_band, need_xi=j > 0)
        row_f, row_g = 2 * j, 2 * j + 1
        matrix[row_f, col_a(j)] -= pd[1] / k_in
        matrix[row_g, col_a(j)] -= pv[1] / mu_in
        if j > 0:
            matrix[row_f, col_b(j)] -= xd[1] / k_in
            matrix[row_g, col_b(j)] -= xv[1] / mu_in

        if j < L - 1:
            outer = split.shells[j + 1]
            k_out, mu_out = outer.wavenumber(omega), complex(outer.mu)
            pv, pd, xv, xd = _raw(k_out * R, 1, cfg.im_safe_band)
            matrix[row_f, col_a(j + 1)] += pd[1] / k_out
            matrix[row_g, col_a(j + 1)] += pv[1] / mu_out
            matrix[row_f, col_b(j + 1)] += xd[1] / k_out
            matrix[row_g, col_b(j + 1)] += xv[1] / mu_out
            c_out = particular[j + 1]
        else:
            _, _, xv, xd = _raw(omega * R, 1, cfg.im_safe_band)
            matrix[row_f, 2 * L - 1] += xd[1] / omega
            matrix[row_g, 2 * L - 1] += xv[1]
            c_out = 0j
        # tangential E of the particular field jumps by (c_in - c_out) x_tan
        rhs[row_f] = R * (particular[j] - c_out)

    scale = np.max(np.abs(matrix), axis=0)
    scale[scale == 0.0] = 1.0
    solution = np.linalg.solve(matrix / scale, rhs) / scale

    if weights == (0j, 0j):
        solution = np.zeros_like(solution)

    layers = []
    for l, shell in enumerate(split.shells):
        A = solution[col_a(l)] / E1
        B = 0j if l == 0 else solution[col_b(l)] / E1
        zero = np.zeros(1, dtype=complex)
        layers.append(LayerAmplitudes(
            inner_radius=split.inner_radius(l),
            outer_radius=shell.outer_radius,
            eps=complex(shell.eps), mu=complex(shell.mu),
            te_A=zero, te_B=zero,
            tm_A=np.array([A]), tm_B=np.array([B]),
            particular=particular[l],
        ))

    a1 = solution[2 * L - 1] / (1j * E1)
    return MultipoleCoefficients(
        a=np.array([a1]), b=np.zeros(1, dtype=complex),
        frame=frame, weights=weights, kind="current",
        sphere=split, interior=tuple(layers), source_layers=sources,
    )


# ============================================================================
# Tangential traces
# ============================================================================

def exterior_trace_solve(
    radius: float,
    omega: float,
    trace,
    config: Optional[SolverConfig] = None,
) -> MultipoleCoefficients:
    """
    Outgoing field whose tangential E on the sphere of ``radius`` equals the trace.

    Per order: b_n = -te_n x / xi_n(x), a_n = -i tm_n x / xi_n'(x), x = omega * radius.

    Raises:
        ResonanceDivisionError: a denominator vanishes
        CutoffError: trace longer than n_max
    """
    cfg = config or SolverConfig()
    te, tm = trace.te, trace.tm
    nmax = te.size
    if nmax > cfg.n_max:
        raise CutoffError(f"trace has {nmax} orders, N_max = {cfg.n_max}")
    x = omega * radius
    xv, xd, xl = xi_table(x, nmax, cfg.im_safe_band)
    xv, xd = xv[1:], xd[1:]
    if np.any(np.abs(xv) == 0.0) or np.any(np.abs(xd) == 0.0) or not np.all(np.isfinite(xv)):
        raise ResonanceDivisionError(f"vanishing outgoing Riccati value at x = {x}")
    damp = np.exp(-xl[1:])
    b = -te * x * damp / xv
    a = -1j * tm * x * damp / xd
    return MultipoleCoefficients(
        a=a, b=b, frame=trace.frame_matrix, weights=trace.weights, kind="trace",
    )


def incident_trace(radius: float, omega: float, src, config: Optional[SolverConfig] = None):
    """
    Trace -nu x E^i of a plane wave, so the solved field cancels the incident tangential E.

    The order count grows from the Wiscombe estimate until the implied
    coefficients psi_n / xi_n meet the tail tolerance.
    """
    from src.cloakmap import TangentialTrace

    cfg = config or SolverConfig()
    frame, weights = frame_from_plane_wave(src)
    x = omega * radius
    nmax = wiscombe_cutoff(x)
    while True:
        pv, pd, pl = psi_table(x, nmax, cfg.im_safe_band)
        xv, xd, xl = xi_table(x, nmax, cfg.im_safe_band)
        with np.errstate(over="ignore", under="ignore"):
            ratio = np.abs(pv[1:] / xv[1:]) * np.exp(pl[1:] - xl[1:])
        top = float(ratio.max())
        if top == 0.0 or ratio[-1] < cfg.tail_tolerance * top or nmax >= cfg.n_max:
            break
        nmax = min(cfg.n_max, nmax + max(2, nmax // 4))
    if np.any(pl != 0.0):
        raise OverflowGuardError(f"incident trace at x = {x} needs scaled psi values")
    te = -pv[1:] / x
    tm = 1j * pd[1:] / x
    return TangentialTrace.from_complex(radius, te, tm, frame=frame, weights=weights)
