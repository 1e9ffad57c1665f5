"""Kinetic momentum, localization scale, uncertainty floor, SI conversion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyldyn.expressions import AngleLaw, ScalarField
from weyldyn.observables import (
    SPEED_OF_LIGHT,
    energy_rate,
    kinetic_momentum,
    kinetic_momentum_from_state,
    localization_from_rates,
    localization_k,
    mass_shell_defect,
    momentum_noncollinearity,
    si_rates,
    uncertainty_relation,
    velocity,
    velocity_from_angles,
)
from weyldyn.spinors import Helicity

POS = Helicity.POSITIVE
NEG = Helicity.NEGATIVE
ROTATING = AngleLaw.linear(math.pi / 2, math.sqrt(3), 0.0, math.sqrt(5))


def test_velocity_is_unit_and_helicity_blind():
    for t in (0.0, 0.4, 1.9):
        vp = velocity(ROTATING, POS, t)
        vn = velocity(ROTATING, NEG, t)
        assert np.array_equal(vp, vn)
        assert np.linalg.norm(vp) == pytest.approx(1.0, abs=1e-12)


def test_velocity_from_angles_vectorized():
    theta = np.array([0.0, math.pi / 2, math.pi])
    phi = np.zeros(3)
    vx, vy, vz = velocity_from_angles(theta, phi)
    assert vx == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)
    assert vz == pytest.approx([1.0, 0.0, -1.0], abs=1e-12)


def test_frozen_momentum_with_gauge_offset():
    # equator, pure azimuthal spin at 10, constant gauge value -3
    km = kinetic_momentum_from_state(math.pi / 2, 0.0, 0.0, 10.0, -3.0, POS)
    assert km.energy == pytest.approx(3.0, abs=1e-12)
    assert km.momentum == pytest.approx([3.0, 0.0, -5.0], abs=1e-12)


def test_momentum_projection_recovers_energy():
    km = kinetic_momentum_from_state(math.pi / 2, 0.0, 0.0, 10.0, -3.0, POS)
    v = velocity_from_angles(math.pi / 2, 0.0)
    assert float(np.dot(km.momentum, v)) == pytest.approx(km.energy, abs=1e-12)


def test_kinetic_momentum_requires_time_only_gauge():
    with pytest.raises(ValueError):
        kinetic_momentum(ROTATING, ScalarField.from_text("x"), POS, 0.0)


def test_kinetic_momentum_matches_state_form():
    s = ScalarField.from_text("2*t - 1")
    for t in (0.0, 0.7, 1.5):
        km = kinetic_momentum(ROTATING, s, POS, t)
        theta, phi = ROTATING.angles(t)
        td, pd = ROTATING.rates(t)
        direct = kinetic_momentum_from_state(theta, phi, td, pd,
                                             s.value(t=t), POS)
        assert km.energy == pytest.approx(direct.energy, abs=1e-14)
        assert km.momentum == pytest.approx(direct.momentum, abs=1e-14)


def test_localization_frozen_values():
    # rotating law at t = 0: k = sqrt(2); polar-only piece alone: sqrt(3)/2
    assert localization_k(ROTATING, 0.0).k == pytest.approx(math.sqrt(2), abs=1e-12)
    assert localization_from_rates(math.pi, math.sqrt(3), math.sqrt(5)) == (
        pytest.approx(math.sqrt(3) / 2, abs=1e-12))
    assert localization_k(ROTATING, 0.0).m_star_magnitude == (
        pytest.approx(math.sqrt(2), abs=1e-12))


def test_localization_scales_with_rates():
    assert localization_from_rates(math.pi / 2, 0.0, 10.0) == pytest.approx(5.0)
    assert localization_from_rates(1.0, 0.0, 0.0) == 0.0


def test_energy_rate_frozen_value():
    law = AngleLaw.linear(math.pi / 4, 1.0, 0.0, 1.0)
    assert energy_rate(law, None, POS, 0.0) == pytest.approx(math.sqrt(2) / 4,
                                                             rel=1e-12)
    assert energy_rate(law, None, NEG, 0.0) == pytest.approx(-math.sqrt(2) / 4,
                                                             rel=1e-12)


def test_energy_rate_includes_gauge_drain():
    law = AngleLaw.linear(math.pi / 2)
    s = ScalarField.from_text("3*t")
    assert energy_rate(law, s, POS, 1.0) == pytest.approx(-3.0, abs=1e-12)


def test_energy_rate_matches_finite_difference_of_energy():
    s = ScalarField.from_text("0.5*t^2")
    h = 1e-6
    for t in (0.3, 1.1):
        e_hi = kinetic_momentum(ROTATING, s, POS, t + h).energy
        e_lo = kinetic_momentum(ROTATING, s, POS, t - h).energy
        fd = (e_hi - e_lo) / (2 * h)
        assert energy_rate(ROTATING, s, POS, t) == pytest.approx(fd, abs=1e-6)


def test_mass_shell_frozen_values():
    # equator with phi spinning at 10: k = 5, defect -25, gauge independent
    law = AngleLaw.linear(math.pi / 2, 0.0, 0.0, 10.0)
    assert mass_shell_defect(law, None, POS, 0.4) == pytest.approx(-25.0, abs=1e-10)
    assert mass_shell_defect(law, ScalarField.from_text("2"), POS, 0.4) == (
        pytest.approx(-25.0, abs=1e-10))
    law1 = AngleLaw.linear(math.pi / 2, 0.0, 0.0, 2.0)
    assert mass_shell_defect(law1, ScalarField.from_text("2"), POS, 1.3) == (
        pytest.approx(-1.0, abs=1e-12))


def test_noncollinearity_frozen_value():
    law = AngleLaw.linear(math.pi / 2, 0.0, 0.0, 10.0)
    assert momentum_noncollinearity(law, ScalarField.from_text("-3"), POS, 0.0) == (
        pytest.approx(5.0, abs=1e-12))


angles = st.floats(0.05, math.pi - 0.05)
rates = st.floats(-5.0, 5.0)
gauges = st.floats(-3.0, 3.0)
hels = st.sampled_from([POS, NEG])


@given(angles, st.floats(0.0, 2 * math.pi), rates, rates, gauges, hels)
@settings(max_examples=300, deadline=None)
def test_shell_and_transversality_identities(theta, phi, td, pd, sval, hel):
    km = kinetic_momentum_from_state(theta, phi, td, pd, sval, hel)
    k = localization_from_rates(theta, td, pd)
    v = velocity_from_angles(theta, phi)
    p = km.momentum
    assert km.energy**2 - float(p @ p) == pytest.approx(-(k**2), abs=1e-10)
    assert np.linalg.norm(np.cross(p, v)) == pytest.approx(k, abs=1e-10)
    assert float(p @ v) == pytest.approx(km.energy, abs=1e-10)


def test_uncertainty_frozen_points():
    assert uncertainty_relation(0.0).d_delta_p == 1.0
    assert uncertainty_relation(0.75).d_delta_p == pytest.approx(0.5, abs=1e-15)
    assert uncertainty_relation(1e6).d_delta_p < 1e-6


def test_uncertainty_solves_quadratic_at_machine_precision():
    for p0d in [0.0, 1e-8, 0.3, 1.0, 7.5, 1e3, 1e6]:
        x = uncertainty_relation(p0d).d_delta_p
        assert abs(2 * p0d * x + x * x - 1.0) <= 1e-12


def test_uncertainty_strictly_decreasing():
    grid = np.linspace(0.0, 50.0, 1000)
    vals = [uncertainty_relation(float(p)).d_delta_p for p in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_uncertainty_rejects_negative_spread():
    with pytest.raises(ValueError):
        uncertainty_relation(-0.1)


def test_si_rates_frozen_values():
    r = si_rates(1.0, 1.0)
    assert r.ev_per_meter == 1.0
    assert r.ev_per_second == 299792458.0
    assert SPEED_OF_LIGHT == 299792458.0
    half = si_rates(2.0, 0.5)
    assert half.ev_per_meter == 1.0
    assert half.ev_per_second == 299792458.0
