"""
Reference values computed without the package's own special functions.

Textbook Mie coefficients and Riccati values come from mpmath at 40 digits;
PEC coefficients use scipy's spherical Bessel functions; layered spheres,
with or without a constant current, are integrated as radial ODEs.
"""

import mpmath
import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import spherical_jn, spherical_yn


def riccati_scipy(n: int, z: complex):
    """psi, psi', xi, xi' at order n from scipy's spherical Bessel functions."""
    j = spherical_jn(n, z)
    dj = spherical_jn(n, z, derivative=True)
    y = spherical_yn(n, z)
    dy = spherical_yn(n, z, derivative=True)
    h, dh = j + 1j * y, dj + 1j * dy
    return z * j, j + z * dj, z * h, h + z * dh


def _mp_riccati(kind: str, n: int, zz):
    """(value, derivative) of psi, chi or xi at an mpmath argument, inside a workdps block."""
    def psi(order):
        return mpmath.sqrt(mpmath.pi * zz / 2) * mpmath.besselj(order + 0.5, zz)

    def chi(order):
        return -mpmath.sqrt(mpmath.pi * zz / 2) * mpmath.bessely(order + 0.5, zz)

    def xi(order):
        return psi(order) - 1j * chi(order)

    f = {"psi": psi, "chi": chi, "xi": xi}[kind]
    value = f(n)
    return value, f(n - 1) - n * value / zz


def single_sphere(m_eps: complex, m_mu: complex, x: float, nmax: int, dps: int = 40):
    """
    Textbook a_n, b_n of a homogeneous sphere in vacuum, evaluated at 40 digits.

    The textbook numerators cancel at weak contrast, so double precision
    Bessel values are not a fair reference there.

    Args:
        m_eps, m_mu: Relative permittivity and permeability of the sphere
        x: Size parameter omega * radius
        nmax: Highest order

    Returns:
        (a, b) for n = 1..nmax
    """
    a, b = [], []
    with mpmath.workdps(dps):
        mu1 = mpmath.mpc(m_mu)
        m = mpmath.sqrt(mpmath.mpc(m_eps)) * mpmath.sqrt(mu1)
        xx = mpmath.mpf(x)
        for n in range(1, nmax + 1):
            px, dpx = _mp_riccati("psi", n, xx)
            xi_x, dxx = _mp_riccati("xi", n, xx)
            pm, dpm = _mp_riccati("psi", n, m * xx)
            a.append(complex((m * pm * dpx - mu1 * px * dpm) / (m * pm * dxx - mu1 * xi_x * dpm)))
            b.append(complex((mu1 * pm * dpx - m * px * dpm) / (mu1 * pm * dxx - m * xi_x * dpm)))
    return np.array(a), np.array(b)


def pec_sphere(x: float, nmax: int):
    """a_n = psi_n'/xi_n', b_n = psi_n/xi_n for a perfectly conducting sphere."""
    a, b = [], []
    for n in range(1, nmax + 1):
        px, dpx, xx, dxx = riccati_scipy(n, x)
        a.append(dpx / dxx)
        b.append(px / xx)
    return np.array(a), np.array(b)


def _integrate_mode(n, shells, omega, polarization):
    """
    March one Riccati mode U(r) outwards through the shells.

    ``shells`` are (outer_radius, eps, mu) from the centre. Returns U and
    dU/dr just inside the outer surface.
    """
    outer0, eps0, mu0 = shells[0]
    k = omega * np.sqrt(complex(eps0)) * np.sqrt(complex(mu0))
    r0 = 1e-2 * outer0
    psi, dpsi, _, _ = riccati_scipy(n, k * r0)
    state = np.array([psi, k * dpsi], dtype=complex)
    start, mu = r0, complex(mu0)

    for i, (outer, eps, shell_mu) in enumerate(shells):
        k_new = omega * np.sqrt(complex(eps)) * np.sqrt(complex(shell_mu))
        mu_new = complex(shell_mu)
        if i > 0:
            u, du = state
            if polarization == "te":
                # continuous: U / k and (dU/dr) / (k mu)
                state = np.array([u * k_new / k, du * k_new * mu_new / (k * mu)])
            else:
                # continuous: (dU/dr) / k^2 and U / mu
                state = np.array([u * mu_new / mu, du * k_new ** 2 / k ** 2])
        k, mu = k_new, mu_new

        def rhs(r, y, k=k):
            return [y[1], (n * (n + 1) / r ** 2 - k ** 2) * y[0]]

        sol = solve_ivp(rhs, (start, outer), state, method="DOP853", rtol=1e-12, atol=1e-14 * abs(state).max())
        state = sol.y[:, -1]
        start = outer
    return state, k, mu


def layered_sphere_ode(shells, omega: float, nmax: int):
    """
    a_n, b_n of a layered sphere from direct radial integration.

    Args:
        shells: (outer_radius, eps, mu) tuples from the centre outwards
        omega: Angular frequency
        nmax: Highest order

    Returns:
        (a, b) for n = 1..nmax
    """
    R = shells[-1][0]
    x = omega * R
    a, b = [], []
    for n in range(1, nmax + 1):
        px, dpx, xx, dxx = riccati_scipy(n, x)
        coeffs = {}
        for pol in ("te", "tm"):
            (u, du), k, mu = _integrate_mode(n, shells, omega, pol)
            if pol == "te":
                u_out, du_out = u * omega / k, du * omega * 1.0 / (k * mu)
            else:
                u_out, du_out = u * 1.0 / mu, du * omega ** 2 / k ** 2
            d = du_out / omega
            coeffs[pol] = (px * d - dpx * u_out) / (xx * d - dxx * u_out)
        a.append(coeffs["tm"])
        b.append(coeffs["te"])
    return np.array(a), np.array(b)


def uniform_ball_far_field(J, radius: float, omega: float, xhat):
    """Far-field amplitude of a constant current J on a ball in vacuum."""
    J = np.asarray(J, dtype=complex)
    xhat = np.asarray(xhat, dtype=float)
    xhat = xhat / np.linalg.norm(xhat)
    ka = omega * radius
    form = (np.sin(ka) - ka * np.cos(ka)) / omega ** 2
    return 1j * form * (J - xhat * np.dot(xhat, J))


def riccati_mp(kind: str, n: int, z: complex, dps: int = 40):
    """(value, derivative) of psi, chi or xi at 40 digits."""
    with mpmath.workdps(dps):
        value, derivative = _mp_riccati(kind, n, mpmath.mpc(z))
        return complex(value), complex(derivative)


def _march_degree_one(state, lo: float, hi: float, omega: float, eps: complex, mu: complex, J: complex):
    def rhs(r, y):
        u, w = y
        return [(J - 2 * w / r ** 2) / (1j * omega * eps) - 1j * omega * mu * w,
                -1j * omega * eps * u + J * r]

    scale = max(float(np.abs(state).max()), abs(J) * hi ** 2, 1e-300)
    sol = solve_ivp(rhs, (lo, hi), np.asarray(state, dtype=complex), method="DOP853",
                    rtol=1e-12, atol=1e-15 * scale)
    return sol.y[:, -1]


def current_ode_exterior_field(shells, omega: float, J0: complex, r_in: float, r_out: float, points):
    """
    Exterior E of a constant current J0 z-hat on r_in <= r <= r_out inside a layered sphere.

    With E = f cos(theta) r-hat - g sin(theta) theta-hat, H = h sin(theta) phi-hat,
    u = r g and w = r h, Maxwell's equations reduce to

        u' = (J0 [source] - 2 w / r^2) / (i omega eps) - i omega mu w
        w' = -i omega eps u + J0 r [source]

    Both u and w are continuous at interfaces. The regular solution is
    started from the exact degree-1 field near the centre, the particular
    one from the constant field J0 / (i omega eps) when the source reaches
    the centre, and the outgoing exterior amplitude is fixed at the surface.
    """
    R = shells[-1][0]
    r0 = 1e-2 * min(shells[0][0], r_out)
    eps0, mu0 = complex(shells[0][1]), complex(shells[0][2])
    k0 = omega * np.sqrt(eps0) * np.sqrt(mu0)
    psi, dpsi, _, _ = riccati_scipy(1, k0 * r0)
    homogeneous = np.array([dpsi / k0, psi / (1j * omega * mu0)], dtype=complex)
    if r_in <= r0:
        particular = np.array([J0 / (1j * omega * eps0) * r0, 0.0], dtype=complex)
    else:
        particular = np.zeros(2, dtype=complex)

    breaks = sorted({r0, R, *[s[0] for s in shells], *[v for v in (r_in, r_out) if v > r0]})
    for lo, hi in zip(breaks, breaks[1:]):
        mid = 0.5 * (lo + hi)
        _, eps, mu = next(s for s in shells if s[0] >= mid)
        eps, mu = complex(eps), complex(mu)
        forcing = J0 if r_in <= mid <= r_out else 0.0

        homogeneous = _march_degree_one(homogeneous, lo, hi, omega, eps, mu, 0.0)
        particular = _march_degree_one(particular, lo, hi, omega, eps, mu, forcing)

    _, _, xi, dxi = riccati_scipy(1, omega * R)
    outgoing = np.array([dxi / omega, xi / (1j * omega)])
    _, beta = np.linalg.solve(np.column_stack([homogeneous, -outgoing]), -particular)

    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    _, _, xi, dxi = riccati_scipy(1, omega * r)
    u, w = beta * dxi / omega, beta * xi / (1j * omega)
    f, g = -2 * w / (1j * omega * r ** 2), u / r
    cos_t = points[:, 2] / r
    sin_theta_hat = np.column_stack([cos_t * points[:, 0] / r, cos_t * points[:, 1] / r,
                                     -(points[:, 0] ** 2 + points[:, 1] ** 2) / r ** 2])
    return (f * cos_t)[:, None] * points / r[:, None] - g[:, None] * sin_theta_hat
