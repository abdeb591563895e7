"""Tests for exponents, source models and the virtual-space reduction."""

from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.cloakmap import (
    CloakSpec,
    CoreBallCurrent,
    PlaneWave,
    ShellBallCurrent,
    TangentialTrace,
    current_l2_norm,
    exact,
    exponents,
    physical_source,
    predicted_rates,
    validate_source,
    virtual_scatterer,
    virtual_source,
)
from src.exceptions import ConfigurationError, TheoremPreconditionError


@pytest.mark.parametrize("rst, zeta1, zeta2", [
    ((0, 2, 0), 3, 2),
    ((1, 1, 1), 2, 1),
    ((0, 3, -3), 4, 3),
    ((0, 6, 0), -1, 2),
])
def test_exponents_exact(rst, zeta1, zeta2):
    exp = exponents(*rst)
    assert exp.zeta1 == zeta1
    assert exp.zeta2 == zeta2
    assert exp.valid == (zeta1 > 0)


def test_predicted_rates_are_exact_halves():
    rates = predicted_rates(exponents(0, 2, 0))
    assert rates.passive == 3
    assert rates.active_core == Fraction(3, 2)
    assert rates.active_shell == 2


def test_passive_rate_caps_at_three():
    assert predicted_rates(exponents(0, 3, -3)).passive == 3


def test_shell_rate_grows_along_balanced_layers():
    steps = [Fraction(k, 10) for k in range(41)]
    rates = [exponents(0, s, -s).zeta2 for s in steps]
    assert all(later >= earlier for earlier, later in zip(rates, rates[1:]))
    assert rates == steps


def test_exact_reads_floats_by_repr():
    assert exact(0.1) == Fraction(1, 10)
    assert exponents(exact(0.5), exact(1.5), exact(0.0)).zeta1 == Fraction(5, 2)
    with pytest.raises(ConfigurationError):
        exact(float("nan"))


def test_cloak_spec_validation():
    with pytest.raises(ValidationError, match="omega"):
        CloakSpec(rho=0.1)
    with pytest.raises(ValidationError):
        CloakSpec(rho=1.5, omega=1.0)
    with pytest.raises(ValidationError):
        CloakSpec(rho=0.1, omega=1.0, R_inner=2.0, R_outer=1.0)
    with pytest.raises(ValidationError):
        CloakSpec(rho=0.1, omega=1.0, eta=1e4)
    with pytest.raises(ValidationError):
        CloakSpec(rho=0.1, omega=1.0, colour="red")


def test_with_rho_revalidates(cloak_020):
    assert cloak_020.with_rho(0.02).rho == 0.02
    with pytest.raises(ValidationError):
        cloak_020.with_rho(0.0)


def test_plane_wave_must_be_transverse():
    with pytest.raises(ValidationError):
        PlaneWave(khat=(0.0, 0.0, 1.0), pol_re=(0.0, 0.0, 1.0))
    with pytest.raises(ValidationError):
        PlaneWave(khat=(0.0, 0.0, 2.0))
    wave = PlaneWave(khat=(1.0, 0.0, 0.0), pol_re=(0.0, 1.0, 0.0), pol_im=(0.0, 0.0, 1.0))
    assert_allclose(wave.pol, [0.0, 1.0, 1.0j])


def test_virtual_scatterer_shells(cloak_020):
    sphere = virtual_scatterer(cloak_020)
    core, layer = sphere.shells
    assert core.outer_radius == pytest.approx(0.05)
    assert layer.outer_radius == pytest.approx(0.1)
    assert core.eps == pytest.approx(2.0 / 0.1)
    assert core.mu == pytest.approx(1.0 / 0.1)
    assert layer.eps == pytest.approx(1.0 + 1j * 100.0)
    assert layer.mu == pytest.approx(1.0)


def test_virtual_scatterer_without_layer(cloak_020):
    sphere = virtual_scatterer(cloak_020.model_copy(update={"conducting_layer": False}))
    assert sphere.shells[1].eps == 1.0
    assert sphere.shells[1].mu == 1.0


def test_source_scaling_round_trip(cloak_020):
    src = ShellBallCurrent(r_in=0.6, r_out=0.9, J_re=(1.0, 2.0, 0.0))
    local = virtual_source(cloak_020, src)
    assert local.r_in == pytest.approx(0.06)
    assert_allclose(local.J, np.array([100.0, 200.0, 0.0]))
    back = physical_source(cloak_020, local)
    assert back.r_out == pytest.approx(0.9)
    assert_allclose(back.J, src.J)


def test_virtual_source_keeps_l2_norm_scaling(cloak_020):
    src = CoreBallCurrent(radius=0.3)
    local = virtual_source(cloak_020, src)
    # |J rho^-2| * sqrt(volume rho^3) = rho^-1/2 times the physical norm
    assert current_l2_norm(local) == pytest.approx(current_l2_norm(src) / np.sqrt(cloak_020.rho))


def test_validate_source_regions(cloak_020):
    with pytest.raises(TheoremPreconditionError):
        validate_source(cloak_020, CoreBallCurrent(radius=0.3))
    conducting = cloak_020.model_copy(update={"core": cloak_020.core.model_copy(update={"sigma": 1.0})})
    validate_source(conducting, CoreBallCurrent(radius=0.3))
    with pytest.raises(ConfigurationError):
        validate_source(conducting, CoreBallCurrent(radius=0.7))
    validate_source(cloak_020, ShellBallCurrent(r_in=0.6, r_out=0.9))
    with pytest.raises(ConfigurationError):
        validate_source(cloak_020, ShellBallCurrent(r_in=0.3, r_out=0.9))


def test_trace_from_complex():
    trace = TangentialTrace.from_complex(0.2, [1.0, 0.5j], [1.0 + 1.0j, 0.0], weights=(1.0, 1.0j))
    assert_allclose(trace.te, [1.0, 0.5j])
    assert_allclose(trace.tm, [1.0 + 1.0j, 0.0])
    assert trace.weights == (1.0 + 0j, 1.0j)
    assert_allclose(trace.frame_matrix, np.eye(3))
    with pytest.raises(ValidationError):
        TangentialTrace(radius=0.2, te_re=[1.0], tm_re=[1.0, 2.0])
