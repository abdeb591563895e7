"""Tests for the layered-sphere solves, field evaluation and energy bookkeeping."""

import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import (
    current_ode_exterior_field,
    layered_sphere_ode,
    pec_sphere,
    single_sphere,
    uniform_ball_far_field,
)
from src.cloakmap import (
    CloakSpec,
    CoreBallCurrent,
    CoreMedium,
    PlaneWave,
    ShellBallCurrent,
    TangentialTrace,
    virtual_scatterer,
)
from src.config import SolverConfig
from src.experiments.cloak_bust import EPS_SCAN
from src.exceptions import (
    ConfigurationError,
    CutoffError,
    DomainError,
    GridResolutionWarning,
    OverflowGuardError,
    UnsupportedSourceError,
)
from src.farnorms import make_grid, pattern_from_coefficients
from src.mie_solver import (
    LayeredSphere,
    Shell,
    cross_sections,
    current_n1_solve,
    energy_balance,
    evaluate_fields,
    exterior_trace_solve,
    extinction_from_coefficients,
    far_field,
    far_field_via_surface_integral,
    incident_fields,
    incident_trace,
    near_field_trace,
    plane_wave_solve,
    scattered_fields,
    wiscombe_cutoff,
)

DIRECTIONS = np.array([
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.3, -0.4, 0.5],
    [-0.2, 0.7, -0.6],
    [0.0, 0.0, -1.0],
])


def _unit_rows(v):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return v / np.linalg.norm(v, axis=1)[:, None]


def _tangential(field, normals):
    return field - np.sum(field * normals, axis=1)[:, None] * normals


def _relative_gap(ours, reference):
    return float(np.max(np.abs(ours - reference)) / np.max(np.abs(reference)))


def _sphere(*layers):
    return LayeredSphere(shells=tuple(Shell(r, complex(e), complex(m)) for r, e, m in layers))


# ============================================================================
# Plane-wave coefficients
# ============================================================================

@pytest.mark.parametrize("eps, mu, omega", [
    (2.25, 1.0, 1.0),
    ((1.5 + 0.1j) ** 2, 1.0, 5.0),
    (4.0, 2.0, 2.0),
    (-8.0 + 0.5j, 1.0, 1.0),
    (1.0 + 1e-3j, 1.0, 0.1),
])
def test_single_sphere_matches_textbook(eps, mu, omega):
    coeffs = plane_wave_solve(_sphere((1.0, eps, mu)), omega, PlaneWave())
    a, b = single_sphere(eps, mu, omega, coeffs.N)
    assert _relative_gap(coeffs.a, a) <= 1e-12
    assert _relative_gap(coeffs.b, b) <= 1e-12


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("eps", [1.5 + 0.1j, 3.0 + 2.0j])
def test_single_sphere_size_and_index_grid(x, eps):
    coeffs = plane_wave_solve(_sphere((1.0, eps, 1.0)), x, PlaneWave())
    a, b = single_sphere(eps, 1.0, x, coeffs.N)
    assert _relative_gap(coeffs.a, a) <= 1e-12
    assert _relative_gap(coeffs.b, b) <= 1e-12


@pytest.mark.parametrize("layers, omega", [
    (((0.5, 4.0, 1.0), (1.0, 2.0 + 1.0j, 1.5)), 1.5),
    (((0.3, 1.0 + 2.0j, 1.0), (0.7, 3.0, 1.0), (1.0, 1.5, 2.0)), 2.0),
    (((0.2, 6.0 + 0.3j, 1.0), (0.6, 1.0, 1.0), (1.0, 2.5, 1.2)), 1.8),
])
def test_layered_sphere_matches_radial_ode(layers, omega):
    coeffs = plane_wave_solve(_sphere(*layers), omega, PlaneWave())
    orders = min(coeffs.N, 6)
    a, b = layered_sphere_ode(layers, omega, orders)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    assert np.max(np.abs(coeffs.a[:orders] - a)) <= 1e-8 * scale
    assert np.max(np.abs(coeffs.b[:orders] - b)) <= 1e-8 * scale


def test_vacuum_layers_do_not_scatter():
    coeffs = plane_wave_solve(_sphere((0.4, 1.0, 1.0), (1.0, 1.0, 1.0)), 2.0, PlaneWave())
    assert np.max(np.abs(coeffs.a)) < 1e-14
    assert np.max(np.abs(coeffs.b)) < 1e-14


def test_extra_orders_do_not_move_far_field():
    sphere = _sphere((0.5, 3.0 + 0.2j, 1.0), (1.0, 1.8, 1.2))
    grid = make_grid(16, 32)
    base = plane_wave_solve(sphere, 2.0, PlaneWave())
    longer = plane_wave_solve(sphere, 2.0, PlaneWave(), SolverConfig(tail_tolerance=1e-60))
    assert longer.N >= base.N + 10
    assert_allclose(longer.a[:base.N], base.a, rtol=1e-12, atol=1e-15 * np.max(np.abs(base.a)))
    before = pattern_from_coefficients(base, 2.0, grid)
    after = pattern_from_coefficients(longer, 2.0, grid)
    top = float(np.max(before.magnitudes()))
    assert np.max(np.abs(after.values - before.values)) < 1e-12 * top
    assert abs(float(np.max(after.magnitudes())) - top) < 1e-12 * top


def test_cutoff_follows_wiscombe_and_tail():
    assert wiscombe_cutoff(0.0) == 4
    assert wiscombe_cutoff(10.0) == int(np.ceil(10 + 4.05 * 10 ** (1 / 3) + 2))
    coeffs = plane_wave_solve(_sphere((1.0, 2.25, 1.0)), 10.0, PlaneWave())
    assert coeffs.N >= wiscombe_cutoff(10.0)
    assert coeffs.tail_ratio() < SolverConfig().tail_tolerance


def test_cutoff_error_when_n_max_too_small():
    with pytest.raises(CutoffError):
        plane_wave_solve(_sphere((1.0, 2.25, 1.0)), 20.0, PlaneWave(), SolverConfig(n_max=10))


def test_active_media_rejected():
    with pytest.raises(ConfigurationError):
        _sphere((1.0, 2.0 - 0.1j, 1.0))


def test_lossless_sphere_absorbs_nothing():
    coeffs = plane_wave_solve(_sphere((0.5, 6.0, 1.0), (1.0, 2.0, 1.0)), 3.0, PlaneWave())
    sections = cross_sections(coeffs, 3.0)
    assert abs(sections.abs) <= 1e-10 * sections.ext


@pytest.mark.parametrize("rho", [0.1, 0.05, 0.025, 0.0125])
def test_lossless_cores_without_layer_solve_cleanly(rho):
    for eps_a in EPS_SCAN:
        spec = CloakSpec(rho=rho, omega=1.0, conducting_layer=False, core=CoreMedium(eps=eps_a))
        coeffs = plane_wave_solve(virtual_scatterer(spec), 1.0, PlaneWave())
        sections = cross_sections(coeffs, 1.0)
        assert sections.ext > 0
        assert abs(sections.abs) <= 1e-6 * sections.ext


def test_deep_conductor_approaches_pec():
    sphere = _sphere((1.0, 1e12j, 1.0))
    coeffs = plane_wave_solve(sphere, 1.0, PlaneWave(), keep_interior=False)
    a, b = pec_sphere(1.0, coeffs.N)
    assert _relative_gap(coeffs.a, a) < 1e-4
    assert _relative_gap(coeffs.b, b) < 1e-4
    with pytest.raises(OverflowGuardError):
        plane_wave_solve(sphere, 1.0, PlaneWave(), keep_interior=True)


# ============================================================================
# Far field, rotation and polarization
# ============================================================================

def test_optical_theorem():
    coeffs = plane_wave_solve(_sphere((0.6, 3.0 + 0.4j, 1.0), (1.0, 1.8, 1.0)), 2.5, PlaneWave())
    sections = cross_sections(coeffs, 2.5, PlaneWave())
    assert sections.ext == pytest.approx(extinction_from_coefficients(coeffs, 2.5), rel=1e-12)
    assert sections.sca > 0 and sections.abs > 0


def test_cross_sections_without_incident_use_frame():
    wave = PlaneWave(khat=(0.0, 1.0, 0.0), pol_re=(0.0, 0.0, 1.0))
    coeffs = plane_wave_solve(_sphere((1.0, 2.0 + 0.3j, 1.0)), 1.7, wave)
    assert cross_sections(coeffs, 1.7).ext == pytest.approx(cross_sections(coeffs, 1.7, wave).ext, rel=1e-12)


def test_rotated_incidence_rotates_far_field():
    sphere = _sphere((0.5, 3.0, 1.0), (1.0, 1.5 + 0.2j, 1.0))
    theta, phi = 0.7, 1.9
    rz = np.array([[np.cos(phi), -np.sin(phi), 0], [np.sin(phi), np.cos(phi), 0], [0, 0, 1]])
    ry = np.array([[np.cos(theta), 0, np.sin(theta)], [0, 1, 0], [-np.sin(theta), 0, np.cos(theta)]])
    rot = rz @ ry
    base = plane_wave_solve(sphere, 2.0, PlaneWave())
    turned = plane_wave_solve(sphere, 2.0, PlaneWave(khat=tuple(rot[:, 2]), pol_re=tuple(rot[:, 0])))
    for d in _unit_rows(DIRECTIONS):
        assert_allclose(far_field(turned, 2.0, rot @ d), rot @ far_field(base, 2.0, d), atol=1e-12)


def test_circular_polarization_is_linear_combination():
    sphere = _sphere((1.0, 2.5 + 0.1j, 1.0))
    x_pol = plane_wave_solve(sphere, 1.5, PlaneWave(pol_re=(1.0, 0.0, 0.0)))
    y_pol = plane_wave_solve(sphere, 1.5, PlaneWave(pol_re=(0.0, 1.0, 0.0)))
    circ = plane_wave_solve(sphere, 1.5, PlaneWave(pol_re=(1.0, 0.0, 0.0), pol_im=(0.0, 1.0, 0.0)))
    for d in _unit_rows(DIRECTIONS):
        expected = far_field(x_pol, 1.5, d) + 1j * far_field(y_pol, 1.5, d)
        assert_allclose(far_field(circ, 1.5, d), expected, atol=1e-12)


def test_far_field_is_transverse():
    coeffs = plane_wave_solve(_sphere((1.0, 4.0, 1.0)), 3.0, PlaneWave())
    for d in _unit_rows(DIRECTIONS):
        assert abs(np.dot(far_field(coeffs, 3.0, d), d)) < 1e-13


def test_far_field_reciprocity():
    sphere = _sphere((0.4, 5.0 + 0.5j, 1.0), (1.0, 2.0, 1.5))
    omega = 1.7
    rng = np.random.default_rng(11)
    for _ in range(4):
        d, xhat = _unit_rows(rng.normal(size=(2, 3)))
        p = np.cross(d, rng.normal(size=3))
        p /= np.linalg.norm(p)
        q = np.cross(xhat, rng.normal(size=3))
        q /= np.linalg.norm(q)
        forward = plane_wave_solve(sphere, omega, PlaneWave(khat=tuple(d), pol_re=tuple(p)))
        backward = plane_wave_solve(sphere, omega, PlaneWave(khat=tuple(-xhat), pol_re=tuple(q)))
        A = far_field(forward, omega, xhat)
        B = far_field(backward, omega, -d)
        assert abs(np.dot(q, A) - np.dot(p, B)) <= 1e-10 * max(np.linalg.norm(A), np.linalg.norm(B))


# ============================================================================
# Near fields and interface conditions
# ============================================================================

def test_interface_continuity():
    layers = ((0.4, 5.0 + 0.5j, 1.0), (0.8, 2.0, 1.5), (1.0, 1.2 + 0.1j, 1.0))
    sphere = _sphere(*layers)
    omega = 2.0
    coeffs = plane_wave_solve(sphere, omega, PlaneWave())
    normals = _unit_rows(DIRECTIONS)
    for i, (radius, eps, mu) in enumerate(layers):
        points = radius * normals
        E_in, H_in = evaluate_fields(coeffs, omega, points, layer=i)
        E_out, H_out = evaluate_fields(coeffs, omega, points, layer=i + 1)
        scale = np.max(np.abs(E_out)) + np.max(np.abs(H_out))
        assert np.max(np.abs(_tangential(E_in, normals) - _tangential(E_out, normals))) < 1e-10 * scale
        assert np.max(np.abs(_tangential(H_in, normals) - _tangential(H_out, normals))) < 1e-10 * scale
        eps_out, mu_out = (layers[i + 1][1], layers[i + 1][2]) if i + 1 < len(layers) else (1.0, 1.0)
        d_in = eps * np.sum(E_in * normals, axis=1)
        d_out = eps_out * np.sum(E_out * normals, axis=1)
        b_in = mu * np.sum(H_in * normals, axis=1)
        b_out = mu_out * np.sum(H_out * normals, axis=1)
        assert np.max(np.abs(d_in - d_out)) < 1e-10 * scale * abs(eps)
        assert np.max(np.abs(b_in - b_out)) < 1e-10 * scale * abs(mu)


def test_scattered_fields_reject_interior_points():
    coeffs = plane_wave_solve(_sphere((1.0, 2.0, 1.0)), 1.0, PlaneWave())
    with pytest.raises(DomainError):
        scattered_fields(coeffs, 1.0, [[0.5, 0.0, 0.0]])
    with pytest.raises(DomainError):
        near_field_trace(coeffs, None, 1.0, 1.0)


def test_surface_integral_reproduces_far_field():
    coeffs = plane_wave_solve(_sphere((0.5, 3.0, 1.0), (1.0, 1.5 + 0.2j, 1.0)), 2.0, PlaneWave())
    samples = near_field_trace(coeffs, None, 2.0, 1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error", GridResolutionWarning)
        for d in _unit_rows(DIRECTIONS):
            A = far_field_via_surface_integral(samples, 2.0, d, reference=coeffs)
            assert_allclose(A, far_field(coeffs, 2.0, d), atol=1e-7 * np.max(np.abs(far_field(coeffs, 2.0, d))) + 1e-14)


def test_surface_integral_converges_with_grid():
    coeffs = plane_wave_solve(_sphere((0.5, 3.0, 1.0), (1.0, 1.5 + 0.2j, 1.0)), 2.0, PlaneWave())
    d = _unit_rows([0.3, -0.4, 0.5])[0]
    expected = far_field(coeffs, 2.0, d)
    floor = 1e-11 * np.linalg.norm(expected)
    errors = []
    for n_polar in (8, 16, 32):
        samples = near_field_trace(coeffs, None, 2.0, 1.5, make_grid(n_polar, 2 * n_polar))
        A = far_field_via_surface_integral(samples, 2.0, d)
        errors.append(np.linalg.norm(A - expected))
    assert errors[0] > floor
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= max(coarse / 10.0, floor)


def test_coarse_surface_grid_warns():
    coeffs = plane_wave_solve(_sphere((1.0, 2.25, 1.0)), 10.0, PlaneWave())
    samples = near_field_trace(coeffs, None, 10.0, 1.2, make_grid(8, 16))
    with pytest.warns(GridResolutionWarning):
        far_field_via_surface_integral(samples, 10.0, [0.0, 0.0, 1.0], reference=coeffs)


# ============================================================================
# Energy
# ============================================================================

ENERGY_CASES = [
    (((0.5, 4.0 + 1.0j, 1.0), (1.0, 2.0 + 0.3j, 1.0)), 1.5, PlaneWave()),
    (((1.0, 2.0 + 1.0j, 1.0),), 1.0, PlaneWave(khat=(0.0, 1.0, 0.0), pol_re=(0.0, 0.0, 1.0))),
    (((1.0, 2.0, 1.5 + 0.4j),), 1.0, PlaneWave()),
    (((0.6, 2.0 + 1.0j, 1.0), (1.0, 1.5, 1.0)), 1.2, CoreBallCurrent(radius=0.3, J_re=(1.0, 0.0, 0.5))),
    (((0.5, 2.0, 1.0), (0.8, 3.0 + 0.5j, 1.2), (1.0, 1.5, 1.0)), 1.5,
     ShellBallCurrent(r_in=0.5, r_out=0.8, J_re=(0.0, 0.0, 1.0))),
]


@pytest.mark.parametrize("layers, omega, src", ENERGY_CASES)
def test_energy_balance_closes(layers, omega, src):
    sphere = _sphere(*layers)
    if isinstance(src, PlaneWave):
        coeffs = plane_wave_solve(sphere, omega, src)
    else:
        coeffs = current_n1_solve(sphere, omega, src)
    balance = energy_balance(sphere, omega, src, coeffs)
    assert not balance.lossless
    assert balance.absorbed > 0
    assert balance.residual < 1e-8


def test_energy_balance_matches_cross_sections():
    sphere = _sphere((0.5, 4.0 + 1.0j, 1.0), (1.0, 2.0 + 0.3j, 1.0))
    coeffs = plane_wave_solve(sphere, 1.5, PlaneWave())
    balance = energy_balance(sphere, 1.5, PlaneWave(), coeffs)
    assert balance.absorbed == pytest.approx(cross_sections(coeffs, 1.5).abs, rel=1e-8)


def test_energy_balance_lossless_is_absolute():
    sphere = _sphere((0.5, 4.0, 1.0), (1.0, 2.0, 1.5))
    coeffs = plane_wave_solve(sphere, 1.5, PlaneWave())
    balance = energy_balance(sphere, 1.5, PlaneWave(), coeffs)
    assert balance.lossless
    assert balance.absorbed == 0.0
    assert abs(balance.absorbed - balance.flux_rhs) < 1e-10
    assert balance.residual == abs(balance.flux_rhs)


def test_energy_balance_needs_interior():
    sphere = _sphere((1.0, 2.0 + 1.0j, 1.0))
    coeffs = plane_wave_solve(sphere, 1.0, PlaneWave(), keep_interior=False)
    with pytest.raises(DomainError):
        energy_balance(sphere, 1.0, PlaneWave(), coeffs)


# ============================================================================
# Currents
# ============================================================================

def test_current_ball_in_vacuum_matches_closed_form():
    sphere = _sphere((1.0, 1.0, 1.0))
    src = CoreBallCurrent(radius=0.4, J_re=(0.3, 0.0, 1.0), J_im=(0.0, 0.5, 0.0))
    coeffs = current_n1_solve(sphere, 1.3, src)
    for d in _unit_rows(DIRECTIONS):
        expected = uniform_ball_far_field(src.J, 0.4, 1.3, d)
        assert_allclose(far_field(coeffs, 1.3, d), expected, rtol=1e-10, atol=1e-14)


def test_shell_current_in_vacuum_matches_closed_form():
    sphere = _sphere((0.5, 1.0, 1.0), (1.0, 1.0, 1.0))
    src = ShellBallCurrent(r_in=0.5, r_out=0.8, J_re=(0.0, 1.0, 0.0))
    coeffs = current_n1_solve(sphere, 2.0, src)
    assert coeffs.source_layers
    for d in _unit_rows(DIRECTIONS):
        expected = (uniform_ball_far_field(src.J, 0.8, 2.0, d)
                    - uniform_ball_far_field(src.J, 0.5, 2.0, d))
        assert_allclose(far_field(coeffs, 2.0, d), expected, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("layers, omega, src", [
    (((0.3, 2.0 + 1.0j, 1.0), (0.6, 2.0 + 1.0j, 1.0), (1.0, 1.5, 1.0)), 1.2,
     CoreBallCurrent(radius=0.3, J_re=(0.0, 0.0, 1.0))),
    (((0.5, 2.0, 1.0), (0.8, 3.0 + 0.5j, 1.2), (1.0, 1.5, 1.0)), 1.5,
     ShellBallCurrent(r_in=0.5, r_out=0.8, J_re=(0.0, 0.0, 1.0))),
])
def test_layered_current_matches_radial_ode(layers, omega, src):
    coeffs = current_n1_solve(_sphere(*layers), omega, src)
    points = 1.3 * _unit_rows(DIRECTIONS[:-1])
    E, _ = scattered_fields(coeffs, omega, points)
    expected = current_ode_exterior_field(layers, omega, 1.0, src.r_in, src.r_out, points)
    assert np.max(np.abs(E - expected)) <= 1e-8 * np.max(np.abs(expected))


def test_current_field_is_continuous_across_source_boundary():
    sphere = _sphere((0.6, 2.0 + 0.5j, 1.0), (1.0, 3.0, 1.0))
    src = CoreBallCurrent(radius=0.3, J_re=(0.0, 0.0, 1.0))
    coeffs = current_n1_solve(sphere, 1.0, src)
    normals = _unit_rows(DIRECTIONS)
    boundary = coeffs.sphere.radii.index(0.3)
    E_in, H_in = evaluate_fields(coeffs, 1.0, 0.3 * normals, layer=boundary)
    E_out, H_out = evaluate_fields(coeffs, 1.0, 0.3 * normals, layer=boundary + 1)
    scale = np.max(np.abs(E_out))
    assert np.max(np.abs(_tangential(E_in, normals) - _tangential(E_out, normals))) < 1e-9 * scale
    assert np.max(np.abs(_tangential(H_in, normals) - _tangential(H_out, normals))) < 1e-9 * scale


def test_zero_current_gives_zero_field():
    coeffs = current_n1_solve(_sphere((1.0, 2.0, 1.0)), 1.0, CoreBallCurrent(radius=0.5, J_re=(0.0, 0.0, 0.0)))
    assert coeffs.weights == (0j, 0j)
    assert np.all(coeffs.a == 0)
    assert_allclose(far_field(coeffs, 1.0, [1.0, 0.0, 0.0]), np.zeros(3))


def test_current_support_checks():
    sphere = _sphere((0.5, 2.0, 1.0), (1.0, 1.0, 1.0))
    with pytest.raises(UnsupportedSourceError):
        current_n1_solve(sphere, 1.0, ShellBallCurrent(r_in=0.3, r_out=0.7))
    with pytest.raises(UnsupportedSourceError):
        current_n1_solve(sphere, 1.0, CoreBallCurrent(radius=1.5))


# ============================================================================
# Traces
# ============================================================================

def test_incident_trace_gives_pec_coefficients():
    tau = 0.4
    trace = incident_trace(tau, 1.0, PlaneWave())
    coeffs = exterior_trace_solve(tau, 1.0, trace)
    a, b = pec_sphere(tau, coeffs.N)
    assert _relative_gap(coeffs.a, a) <= 1e-12
    assert _relative_gap(coeffs.b, b) <= 1e-12


def test_incident_trace_cancels_tangential_field():
    tau = 0.5
    wave = PlaneWave(khat=(0.0, 0.6, 0.8), pol_re=(1.0, 0.0, 0.0))
    coeffs = exterior_trace_solve(tau, 1.0, incident_trace(tau, 1.0, wave))
    normals = _unit_rows(DIRECTIONS)
    points = tau * normals
    Es, _ = scattered_fields(coeffs, 1.0, points)
    Ei, _ = incident_fields(wave, 1.0, points)
    assert np.max(np.abs(_tangential(Es + Ei, normals))) < 1e-10


def test_fixed_trace_radiates_like_tau_squared():
    te = tm = np.array([1.0, 0.5, 1.0 / 3.0])
    small = exterior_trace_solve(0.01, 1.0, TangentialTrace.from_complex(0.01, te, tm))
    smaller = exterior_trace_solve(0.005, 1.0, TangentialTrace.from_complex(0.005, te, tm))
    d = np.array([1.0, 0.0, 0.0])
    ratio = np.linalg.norm(far_field(small, 1.0, d)) / np.linalg.norm(far_field(smaller, 1.0, d))
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_trace_longer_than_n_max():
    trace = TangentialTrace.from_complex(0.1, np.ones(12), np.ones(12))
    with pytest.raises(CutoffError):
        exterior_trace_solve(0.1, 1.0, trace, SolverConfig(n_max=10))
