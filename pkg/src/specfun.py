"""
Riccati-Bessel functions of complex argument and far-field angular functions.

Conventions:
    psi_n(z) = z j_n(z)        regular kind
    chi_n(z) = -z y_n(z)       irregular kind
    xi_n(z)  = z h_n^(1)(z) = psi_n(z) - i chi_n(z)   outgoing kind

With these, xi_0(z) = -i exp(iz) and psi_n' chi_n - psi_n chi_n' = 1.

Values that would leave the double range are returned in scaled form: the
true value is ``value * exp(log_scale)``.

The logarithmic-derivative machinery (Lentz continued fraction, downward
recurrence for D1, Mackowski's upward recurrence for D3, and Yang's ratio
Q_n) is what the layered solver uses at interfaces; raw values are only
needed for fields inside a single layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_N_MAX = 200
DEFAULT_SAFE_BAND = 600.0
DEFAULT_EPS1 = 1e-3
DEFAULT_EPS2 = 1e-16

_RESCALE_HIGH = 1e250
_RESCALE_LOW = 1e-250


@dataclass(frozen=True)
class RiccatiPair:
    """Value and first derivative of a Riccati-Bessel function at (n, z)."""

    n: int
    z: complex
    value: complex
    derivative: complex
    log_scale: float = 0.0

    @property
    def is_scaled(self) -> bool:
        return self.log_scale != 0.0

    def unscaled(self) -> tuple[complex, complex]:
        """True (value, derivative); may overflow for heavily scaled pairs."""
        factor = math.exp(self.log_scale)
        return self.value * factor, self.derivative * factor


def seed_order(nmax: int, z: complex) -> int:
    """Order at which the downward recurrence for D1 starts."""
    return int(nmax + max(15, math.ceil(1.2 * abs(z))))


def _check_args(n: int, z: complex, n_max: int) -> complex:
    if n < 0:
        raise ValueError(f"order must be nonnegative, got {n}")
    if n > n_max:
        raise ValueError(f"order {n} exceeds N_max = {n_max}")
    z = complex(z)
    if z == 0:
        raise ValueError("Riccati-Bessel functions need |z| > 0")
    return z


# ============================================================================
# Logarithmic derivatives
# ============================================================================

def lentz_dn1(z: complex, n: int, eps1: float = DEFAULT_EPS1, eps2: float = DEFAULT_EPS2) -> complex:
    """
    Logarithmic derivative D_n(z) = psi_n'(z)/psi_n(z) by Lentz's continued
    fraction, including the ill-conditioning workaround.
    """
    z = complex(z)

    def a_i(i):
        return (-1.0) ** (i + 1) * 2.0 * (n + i - 0.5) / z

    numerator = a_i(2) + 1.0 / a_i(1)
    denominator = a_i(2)
    product = a_i(1) * numerator / denominator
    ratio = product
    ctr = 3

    while abs(product.real - 1) > eps2 or abs(product.imag) > eps2:
        ai = a_i(ctr)
        numerator = ai + 1.0 / numerator
        denominator = ai + 1.0 / denominator
        if abs(numerator / ai) < eps1 or abs(denominator / ai) < eps1:
            xi1 = 1.0 + a_i(ctr + 1) * numerator
            xi2 = 1.0 + a_i(ctr + 1) * denominator
            ratio = ratio * xi1 / xi2
            numerator = a_i(ctr + 2) + numerator / xi1
            denominator = a_i(ctr + 2) + denominator / xi2
            ctr += 2
        product = numerator / denominator
        ratio = ratio * product
        ctr += 1
    return ratio - n / z


def log_derivative_psi(z: complex, nmax: int) -> np.ndarray:
    """D1_n(z) for n = 0..nmax by downward recurrence from a Lentz seed."""
    z = complex(z)
    nstart = seed_order(nmax, z)
    dn = np.zeros(nstart + 1, dtype=complex)
    dn[nstart] = lentz_dn1(z, nstart)
    for i in range(nstart - 1, -1, -1):
        dn[i] = (i + 1.0) / z - 1.0 / (dn[i + 1] + (i + 1.0) / z)
    return dn[:nmax + 1]


def _psixi_zero(z: complex) -> complex:
    # psi_0 xi_0 = -i exp(iz) sin z = -(exp(2iz) - 1)/2, bounded for Im z >= 0
    return -0.5 * np.expm1(2j * z)


def log_derivatives(z: complex, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Logarithmic derivatives of psi (D1) and xi (D3) for n = 0..nmax.

    D3 follows Mackowski's upward recurrence through the product psi_n xi_n.
    """
    z = complex(z)
    dn1 = log_derivative_psi(z, nmax)
    dn3 = np.zeros(nmax + 1, dtype=complex)
    psixi = np.zeros(nmax + 1, dtype=complex)
    dn3[0] = 1j
    psixi[0] = _psixi_zero(z)
    for n in range(1, nmax + 1):
        psixi[n] = psixi[n - 1] * (n / z - dn1[n - 1]) * (n / z - dn3[n - 1])
        dn3[n] = dn1[n] + 1j / psixi[n]
    return dn1, dn3


def psi_ratio(z: complex, nmax: int, dn: np.ndarray | None = None) -> np.ndarray:
    """
    psi_{n+1}(z) / psi_n(z) for n = 0..nmax, free of the (n+1)/z cancellation in D1.

    ``dn`` may carry D1 for n = 0..nmax+1 when it is already at hand.
    """
    z = complex(z)
    if dn is None:
        dn = log_derivative_psi(z, nmax + 1)
    n = np.arange(1, nmax + 2)
    return 1.0 / (dn[1:nmax + 2] + n / z)


def xi_ratio(z: complex, nmax: int) -> np.ndarray:
    """
    xi_n(z) / xi_{n-1}(z) for n = 0..nmax by upward recurrence from -i.

    The outgoing kind dominates upwards in n, so the recurrence is stable.
    D3_n = 1/r_n - n/z follows without cancellation for small |z|.
    """
    z = complex(z)
    r = np.zeros(nmax + 1, dtype=complex)
    r[0] = -1j
    for n in range(1, nmax + 1):
        r[n] = (2 * n - 1) / z - 1.0 / r[n - 1]
    return r


def psi_xi_ratio(
    z1: complex,
    z2: complex,
    nmax: int,
    d1: tuple[np.ndarray, np.ndarray] | None = None,
    d2: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """
    Q_n = psi_n(z1) xi_n(z2) / (psi_n(z2) xi_n(z1)) for n = 0..nmax.

    Args:
        z1: Argument at the inner radius of a layer
        z2: Argument at the outer radius of the same layer
        nmax: Highest order
        d1: Precomputed (D1, D3) at z1; only D1 is read
        d2: Precomputed (D1, D3) at z2; only D1 is read
    """
    z1, z2 = complex(z1), complex(z2)
    if d1 is None:
        d1 = log_derivatives(z1, nmax)
    if d2 is None:
        d2 = log_derivatives(z2, nmax)

    b1, b2 = z1.imag, z2.imag
    if max(abs(b1), abs(b2)) < 300.0:
        q0 = np.expm1(-2j * z1) / np.expm1(-2j * z2)
    else:
        a1, a2 = z1.real, z2.real
        q0 = (np.exp(-2.0 * (b2 - b1))
              * (np.exp(-2j * a1) - np.exp(-2.0 * b1))
              / (np.exp(-2j * a2) - np.exp(-2.0 * b2)))

    # xi_{n-1}/xi_n = D3_n + n/z cancels for small |z|; take it from xi_ratio
    r1, r2 = xi_ratio(z1, nmax), xi_ratio(z2, nmax)
    d1_z1, d1_z2 = d1[0], d2[0]
    q = np.zeros(nmax + 1, dtype=complex)
    q[0] = q0
    for n in range(1, nmax + 1):
        q[n] = q[n - 1] * (r2[n] / r1[n]) * (d1_z2[n] + n / z2) / (d1_z1[n] + n / z1)
    return q


# ============================================================================
# Value tables
# ============================================================================

def _scaled_trig(z: complex, safe_band: float) -> tuple[complex, complex, complex, float]:
    """sin z, cos z and exp(iz), with exp(|Im z|) factored out beyond the safe band."""
    b = z.imag
    if abs(b) <= safe_band:
        return np.sin(z), np.cos(z), np.exp(1j * z), 0.0
    a = z.real
    scale = abs(b)
    # for b > 0, exp(-iz) = exp(-ia + b) dominates; mirror for b < 0
    if b > 0:
        e_minus = np.exp(-1j * a)
        e_plus = np.exp(1j * a - 2.0 * b)
    else:
        e_minus = np.exp(-1j * a + 2.0 * b)
        e_plus = np.exp(1j * a)
    sin_s = (e_plus - e_minus) / 2j
    cos_s = (e_plus + e_minus) / 2.0
    return sin_s, cos_s, e_plus, scale


def _rescale(values: list, log_scale: float) -> tuple[list, float]:
    size = max(abs(v) for v in values)
    if size > _RESCALE_HIGH or (0.0 < size < _RESCALE_LOW):
        shift = math.log(size)
        factor = math.exp(-shift)
        return [v * factor for v in values], log_scale + shift
    return values, log_scale


def psi_table(z: complex, nmax: int, safe_band: float = DEFAULT_SAFE_BAND):
    """
    psi_n(z), psi_n'(z) for n = 0..nmax.

    Returns:
        (values, derivatives, log_scales), each of length nmax + 1
    """
    z = complex(z)
    dn = log_derivative_psi(z, nmax)
    sin_z, _, _, scale = _scaled_trig(z, safe_band)

    values = np.zeros(nmax + 1, dtype=complex)
    logs = np.zeros(nmax + 1)
    current, log_scale = sin_z, scale
    values[0], logs[0] = current, log_scale
    for n in range(1, nmax + 1):
        current = current / (dn[n] + n / z)
        (current,), log_scale = _rescale([current], log_scale)
        values[n], logs[n] = current, log_scale
    return values, values * dn, logs


def _upward(first: complex, second: complex, z: complex, nmax: int, log_scale: float):
    """Upward three-term recurrence from orders -1 and 0, with derivatives."""
    values = np.zeros(nmax + 1, dtype=complex)
    derivs = np.zeros(nmax + 1, dtype=complex)
    logs = np.zeros(nmax + 1)
    prev, curr = first, second
    values[0], derivs[0], logs[0] = curr, prev, log_scale
    for n in range(1, nmax + 1):
        nxt = (2 * n - 1) / z * curr - prev
        prev, curr = curr, nxt
        (prev, curr), log_scale = _rescale([prev, curr], log_scale)
        values[n] = curr
        derivs[n] = prev - n * curr / z
        logs[n] = log_scale
    return values, derivs, logs


def chi_table(z: complex, nmax: int, safe_band: float = DEFAULT_SAFE_BAND):
    """chi_n(z), chi_n'(z) by upward recurrence from chi_{-1} = -sin z, chi_0 = cos z."""
    z = complex(z)
    sin_z, cos_z, _, scale = _scaled_trig(z, safe_band)
    return _upward(-sin_z, cos_z, z, nmax, scale)


def xi_table(z: complex, nmax: int, safe_band: float = DEFAULT_SAFE_BAND):
    """
    xi_n(z), xi_n'(z).

    Near the real axis xi = psi - i chi; elsewhere direct upward recurrence
    from xi_{-1} = exp(iz), xi_0 = -i exp(iz), which is stable for the
    outgoing kind.
    """
    z = complex(z)
    if abs(z.imag) < 1.0:
        pv, pd, pl = psi_table(z, nmax, safe_band)
        cv, cd, cl = chi_table(z, nmax, safe_band)
        ref = np.maximum(pl, cl)
        wp = np.exp(pl - ref)
        wc = np.exp(cl - ref)
        return pv * wp - 1j * cv * wc, pd * wp - 1j * cd * wc, ref

    if abs(z.imag) <= safe_band:
        e_iz, log_scale = np.exp(1j * z), 0.0
    else:
        # exp(iz) = exp(i Re z) exp(-Im z)
        e_iz, log_scale = np.exp(1j * z.real), -z.imag
    return _upward(e_iz, -1j * e_iz, z, nmax, log_scale)


def _pair(table, n: int, z: complex) -> RiccatiPair:
    values, derivs, logs = table
    return RiccatiPair(n=n, z=z, value=complex(values[n]),
                       derivative=complex(derivs[n]), log_scale=float(logs[n]))


def riccati_psi(n: int, z: complex, n_max: int = DEFAULT_N_MAX,
                safe_band: float = DEFAULT_SAFE_BAND) -> RiccatiPair:
    """Regular Riccati-Bessel function psi_n(z) = z j_n(z) and its derivative."""
    z = _check_args(n, z, n_max)
    return _pair(psi_table(z, n, safe_band), n, z)


def riccati_chi(n: int, z: complex, n_max: int = DEFAULT_N_MAX,
                safe_band: float = DEFAULT_SAFE_BAND) -> RiccatiPair:
    """Irregular Riccati-Bessel function chi_n(z) = -z y_n(z) and its derivative."""
    z = _check_args(n, z, n_max)
    return _pair(chi_table(z, n, safe_band), n, z)


def riccati_xi(n: int, z: complex, n_max: int = DEFAULT_N_MAX,
               safe_band: float = DEFAULT_SAFE_BAND) -> RiccatiPair:
    """Outgoing Riccati-Bessel function xi_n(z) = z h_n^(1)(z) and its derivative."""
    z = _check_args(n, z, n_max)
    return _pair(xi_table(z, n, safe_band), n, z)


def unscaled_tables(z: complex, nmax: int, safe_band: float = DEFAULT_SAFE_BAND):
    """
    Unscaled (psi, psi', xi, xi') arrays for n = 0..nmax.

    Returns None when any entry had to be rescaled; callers that need raw
    values treat that as leaving the safe band.
    """
    pv, pd, pl = psi_table(z, nmax, safe_band)
    xv, xd, xl = xi_table(z, nmax, safe_band)
    if np.any(pl != 0.0) or np.any(xl != 0.0):
        return None
    return pv, pd, xv, xd


# ============================================================================
# Angular functions
# ============================================================================

def pi_tau_table(nmax: int, mu) -> tuple[np.ndarray, np.ndarray]:
    """
    pi_n(mu) and tau_n(mu) for n = 0..nmax on an array of mu = cos(theta).

    Returns:
        Two arrays of shape (nmax + 1,) + mu.shape; row 0 is zero
    """
    mu = np.asarray(mu, dtype=float)
    pis = np.zeros((nmax + 1,) + mu.shape)
    taus = np.zeros((nmax + 1,) + mu.shape)
    if nmax >= 1:
        pis[1] = 1.0
        taus[1] = mu
    for n in range(2, nmax + 1):
        pis[n] = ((2 * n - 1) * mu * pis[n - 1] - n * pis[n - 2]) / (n - 1)
        taus[n] = n * mu * pis[n] - (n + 1) * pis[n - 1]
    return pis, taus


def angular_pi_tau(n: int, mu: float) -> tuple[float, float]:
    """pi_n(mu) = P_n^1(mu)/sin(theta) and tau_n(mu) = dP_n^1/dtheta."""
    if n < 1:
        raise ValueError(f"angular functions start at n = 1, got {n}")
    pis, taus = pi_tau_table(n, mu)
    return float(pis[n]), float(taus[n])
