"""Tests for Riccati-Bessel tables, log-derivatives and angular functions."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import riccati_mp
from src.specfun import (
    angular_pi_tau,
    chi_table,
    log_derivatives,
    pi_tau_table,
    psi_ratio,
    psi_table,
    psi_xi_ratio,
    riccati_chi,
    riccati_psi,
    riccati_xi,
    unscaled_tables,
    xi_ratio,
    xi_table,
)

ARGUMENTS = [0.5, 3.0 + 0.1j, 10.0 + 2.0j, 30.0, 2.0 + 5.0j]
ORDERS = [0, 1, 5, 20]


@pytest.mark.parametrize("z", ARGUMENTS)
@pytest.mark.parametrize("n", ORDERS)
@pytest.mark.parametrize("kind, func", [("psi", riccati_psi), ("chi", riccati_chi), ("xi", riccati_xi)])
def test_riccati_against_mpmath(kind, func, n, z):
    expected_value, expected_derivative = riccati_mp(kind, n, z)
    value, derivative = func(n, z).unscaled()
    assert_allclose(value, expected_value, rtol=1e-10)
    assert_allclose(derivative, expected_derivative, rtol=1e-10)


def test_xi_zero_is_outgoing_exponential():
    z = 1.7 + 0.3j
    pair = riccati_xi(0, z)
    assert_allclose(pair.value, -1j * np.exp(1j * z), rtol=1e-14)


@pytest.mark.parametrize("z", [0.01 + 0.5j, 0.8, 4.0 + 0.5j, 15.0, 40.0 + 2.0j])
def test_wronskian(z):
    pv, pd, pl = psi_table(z, 50)
    cv, cd, cl = chi_table(z, 50)
    wronskian = (pd * cv - pv * cd) * np.exp(pl + cl)
    assert_allclose(wronskian[1:], np.ones(50), rtol=1e-10)


@pytest.mark.parametrize("z", [500.0, 300.0 + 400.0j])
def test_xi_outgoing_expansion(z):
    xv, _, xl = xi_table(z, 10)
    for n in range(11):
        series = sum(1j ** k * math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k) * (2 * z) ** k)
                     for k in range(n + 1))
        envelope = xv[n] * np.exp(xl[n] - 1j * z) * 1j ** (n + 1)
        assert_allclose(envelope, series, rtol=1e-12)
        assert abs(envelope - 1.0) <= n * (n + 1) / abs(z)


@pytest.mark.parametrize("z", [0.4 + 0.2j, 3.0 + 1.5j, 12.0 + 4.0j])
def test_tables_commute_with_conjugation(z):
    for table in (psi_table, chi_table):
        value, derivative, logs = table(z, 20)
        value_c, derivative_c, logs_c = table(np.conj(z), 20)
        assert_allclose(logs_c, logs)
        assert_allclose(value_c, np.conj(value), rtol=1e-13)
        assert_allclose(derivative_c, np.conj(derivative), rtol=1e-13)


@pytest.mark.parametrize("z", [0.05, 0.02 + 0.01j, 2.0 + 1.0j])
def test_neighbour_ratios_against_mpmath(z):
    g = psi_ratio(z, 8)
    r = xi_ratio(z, 8)
    for n in range(1, 9):
        psi_n, _ = riccati_mp("psi", n, z)
        psi_next, _ = riccati_mp("psi", n + 1, z)
        xi_prev, _ = riccati_mp("xi", n - 1, z)
        xi_n, _ = riccati_mp("xi", n, z)
        assert_allclose(g[n], psi_next / psi_n, rtol=1e-13)
        assert_allclose(r[n], xi_n / xi_prev, rtol=1e-13)


def test_xi_is_psi_minus_i_chi():
    z = 6.0 + 0.4j
    pv, pd, _ = psi_table(z, 25)
    cv, cd, _ = chi_table(z, 25)
    xv, xd, _ = xi_table(z, 25)
    assert_allclose(xv, pv - 1j * cv, rtol=1e-12)
    assert_allclose(xd, pd - 1j * cd, rtol=1e-12)


def test_log_derivatives_match_tables():
    z = 4.0 + 1.5j
    d1, d3 = log_derivatives(z, 40)
    pv, pd, _ = psi_table(z, 40)
    xv, xd, _ = xi_table(z, 40)
    assert_allclose(d1, pd / pv, rtol=1e-11)
    assert_allclose(d3, xd / xv, rtol=1e-10)


@pytest.mark.parametrize("z1, z2", [(1.2 + 0.2j, 2.5 + 0.4j), (0.05 + 0.01j, 0.1 + 0.02j), (0.3, 0.9)])
def test_psi_xi_ratio_against_mpmath(z1, z2):
    q = psi_xi_ratio(z1, z2, 15)
    for n in range(16):
        p1, _ = riccati_mp("psi", n, z1)
        p2, _ = riccati_mp("psi", n, z2)
        x1, _ = riccati_mp("xi", n, z1)
        x2, _ = riccati_mp("xi", n, z2)
        assert_allclose(q[n], p1 * x2 / (p2 * x1), rtol=1e-12)


def test_large_imaginary_part_is_scaled_not_overflowed():
    z = 5.0 + 800.0j
    pair = riccati_psi(3, z)
    assert pair.is_scaled
    assert np.isfinite(pair.value) and np.isfinite(pair.derivative)
    assert pair.log_scale > 700
    assert unscaled_tables(z, 3) is None


def test_deep_conductor_log_derivative_tends_to_minus_i():
    d1, _ = log_derivatives(300.0 + 300.0j, 5)
    assert_allclose(d1[1:], -1j * np.ones(5), atol=1e-2)


def test_argument_checks():
    with pytest.raises(ValueError):
        riccati_psi(-1, 1.0)
    with pytest.raises(ValueError):
        riccati_psi(3, 0.0)
    with pytest.raises(ValueError):
        riccati_psi(250, 1.0, n_max=200)


def test_angular_functions_low_orders():
    mu = np.linspace(-1.0, 1.0, 11)
    pis, taus = pi_tau_table(3, mu)
    assert_allclose(pis[1], np.ones_like(mu))
    assert_allclose(taus[1], mu)
    assert_allclose(pis[2], 3 * mu)
    assert_allclose(taus[2], 3 * np.cos(2 * np.arccos(mu)), atol=1e-13)
    assert_allclose(pis[3], 1.5 * (5 * mu ** 2 - 1), atol=1e-13)


def test_angular_forward_values():
    # pi_n(1) = tau_n(1) = n(n+1)/2
    for n in (1, 4, 9):
        p, t = angular_pi_tau(n, 1.0)
        assert p == pytest.approx(n * (n + 1) / 2)
        assert t == pytest.approx(n * (n + 1) / 2)
    with pytest.raises(ValueError):
        angular_pi_tau(0, 0.5)
