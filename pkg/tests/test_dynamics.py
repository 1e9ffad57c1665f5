"""Equations of motion, field programs, and the fixed-step integrator."""

import math

import numpy as np
import pytest

from weyldyn.dynamics import (
    ConstantField,
    ConstraintViolation,
    DriveField,
    ExprField,
    ParticleState,
    ZeroField,
    accel_from_field,
    integrate_trajectory,
)
from weyldyn.expressions import AngleLaw, ScalarField, parse_expr
from weyldyn.spinors import Helicity

POS = Helicity.POSITIVE
NEG = Helicity.NEGATIVE


def make_state(theta=math.pi / 2, phi=0.0, theta_dot=0.0, phi_dot=0.0,
               helicity=POS, q=1.0):
    return ParticleState((0.0, 0.0, 0.0), theta, phi, theta_dot, phi_dot,
                         helicity, q)


def test_state_rejects_zero_charge():
    with pytest.raises(ValueError):
        make_state(q=0.0)


def test_accel_inversion_frozen_values():
    st = make_state(theta=1.0, phi=0.0, theta_dot=2.0, phi_dot=1.0)
    a = accel_from_field(st, (0.0, 1.0, 3.0))
    assert a.theta_ddot == -2.0
    assert a.phi_ddot == -6.0
    assert a.constraint_residual == 2.0


def test_accel_inversion_mirror_flips_sign():
    st = make_state(theta=1.0, phi=0.0, theta_dot=2.0, phi_dot=1.0, helicity=NEG)
    a = accel_from_field(st, (0.0, 1.0, 3.0))
    assert a.theta_ddot == 2.0
    assert a.phi_ddot == 6.0


def test_accel_inversion_round_trips_drive_field():
    from weyldyn.potentials import drive_field_closed_form

    law = AngleLaw.linear(math.pi / 2, math.sqrt(3), 0.0, math.sqrt(5))
    for hel in (POS, NEG):
        for t in (0.0, 0.7, 1.9):
            theta, phi = law.angles(t)
            td, pd = law.rates(t)
            st = ParticleState((0, 0, 0), theta, phi, td, pd, hel, 1.3)
            f = drive_field_closed_form(law, hel, 1.3, t)
            a = accel_from_field(st, f.e)
            assert a.theta_ddot == pytest.approx(0.0, abs=1e-12)
            assert a.phi_ddot == pytest.approx(0.0, abs=1e-12)
            assert a.constraint_residual == pytest.approx(0.0, abs=1e-12)


def test_field_programs_reject_magnetic_components():
    with pytest.raises(ValueError):
        ConstantField((1.0, 0.0, 0.0), b=(0.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        ExprField(parse_expr("0"), parse_expr("0"), parse_expr("0"),
                  b=(0.0, 1e-3, 0.0))


def test_expr_field_rejects_spatial_dependence():
    with pytest.raises(ValueError, match="x"):
        ExprField(parse_expr("x"), parse_expr("0"), parse_expr("0"))


def test_field_program_sampling_consistency():
    progs = [
        ZeroField(),
        ConstantField((0.2, -0.1, 0.4)),
        ExprField(parse_expr("sin(t)"), parse_expr("0"), parse_expr("t^2")),
        DriveField(AngleLaw.linear(1.0, 1.2, 0.3, 0.7), POS, 1.0),
    ]
    ts = np.linspace(0.0, 2.0, 9)
    for prog in progs:
        grid = prog.sample(ts)
        assert grid.shape == (9, 3)
        for i, t in enumerate(ts):
            assert grid[i] == pytest.approx(prog.field_at(float(t)), abs=1e-14)


@pytest.mark.parametrize("omega1", [1.0, 2.0, math.sqrt(3)])
def test_free_polar_spin_traces_closed_circle(omega1):
    theta0, phi0 = 0.4, 0.9
    period = 2 * math.pi / omega1
    dt = period / round(period / 1e-3)
    st = make_state(theta=theta0, phi=phi0, theta_dot=omega1)
    tr = integrate_trajectory(st, ZeroField(), period, dt)

    # centripetal direction at launch fixes the circle centre exactly
    center = np.array([
        math.cos(theta0) * math.cos(phi0),
        math.cos(theta0) * math.sin(phi0),
        -math.sin(theta0),
    ]) / omega1
    pts = np.stack([tr.x, tr.y, tr.z], axis=1)
    radii = np.linalg.norm(pts - center, axis=1)
    assert np.max(np.abs(radii - 1.0 / omega1)) < 1e-6
    assert np.linalg.norm(pts[-1] - pts[0]) < 1e-6
    assert tr.speed_drift() <= 1e-12


def test_free_azimuthal_spin_traces_helix():
    theta0, omega2 = math.pi / 4, 2.0
    period = 2 * math.pi / omega2
    n_turn = 3000
    dt = period / n_turn
    st = make_state(theta=theta0, phi=0.0, phi_dot=omega2)
    tr = integrate_trajectory(st, ZeroField(), 2 * period, dt)

    center = np.array([0.0, math.sin(theta0) / omega2])
    radial = np.hypot(tr.x - center[0], tr.y - center[1])
    assert np.max(np.abs(radial - math.sin(theta0) / omega2)) < 1e-8

    advance = tr.z[n_turn] - tr.z[0]
    assert advance == pytest.approx(2 * math.pi * math.cos(theta0) / omega2,
                                    abs=1e-9)
    # gap between successive coils, measured perpendicular to the velocity
    assert advance * math.sin(theta0) == pytest.approx(
        math.pi * math.sin(2 * theta0) / omega2, abs=1e-9)


def test_integrator_is_fourth_order():
    def endpoint(dt):
        f = ExprField(parse_expr("0"), parse_expr("0"), parse_expr("sin(t)"))
        st = ParticleState((0, 0, 0), 1.1, 0.3, 0.0, 1.5, POS, 1.0)
        tr = integrate_trajectory(st, f, 4.0, dt)
        return np.array([tr.x[-1], tr.y[-1], tr.z[-1], tr.phi[-1], tr.phi_dot[-1]])

    ref = endpoint(1e-3)
    err_coarse = np.max(np.abs(endpoint(0.02) - ref))
    err_fine = np.max(np.abs(endpoint(0.01) - ref))
    assert err_coarse / err_fine >= 14.0


def test_integrator_matches_closed_form_angles():
    # Ez = sin(t) with the polar angle frozen: phi'' = -2 sin(t) integrates
    # to phi = phi0 + w t + 2 (sin t - t)
    f = ExprField(parse_expr("0"), parse_expr("0"), parse_expr("sin(t)"))
    st = ParticleState((0, 0, 0), 1.1, 0.3, 0.0, 1.5, POS, 1.0)
    tr = integrate_trajectory(st, f, 4.0, 0.01)
    T = 4.0
    assert tr.phi[-1] == pytest.approx(0.3 + 1.5 * T + 2 * (math.sin(T) - T),
                                       abs=1e-9)
    assert tr.phi_dot[-1] == pytest.approx(1.5 + 2 * (math.cos(T) - 1),
                                           abs=1e-9)
    assert np.max(np.abs(tr.theta - 1.1)) == 0.0


def test_uniform_axial_field_drains_and_restores_k():
    st = make_state(phi_dot=10.0)
    tr = integrate_trajectory(st, ConstantField((0.0, 0.0, 0.5)), 20.0, 1e-3)
    assert np.max(np.abs(tr.k - np.abs(5.0 - tr.t / 2))) < 1e-6
    assert tr.k[0] == pytest.approx(5.0, abs=1e-12)
    assert tr.k[-1] == pytest.approx(5.0, abs=1e-6)
    assert tr.speed_drift() <= 1e-12


def test_immediate_constraint_violation():
    st = make_state(phi_dot=10.0)
    with pytest.raises(ConstraintViolation) as exc:
        integrate_trajectory(st, ConstantField((1.0, 0.0, 0.0)), 1.0, 0.01)
    v = exc.value
    assert v.time == 0.0
    assert v.residual == pytest.approx(2.0, abs=1e-12)
    assert v.tolerance == 1e-6
    assert len(v.partial.t) == 1


def test_delayed_constraint_violation_keeps_partial_history():
    ramp = ExprField(parse_expr("((t - 0.5) + abs(t - 0.5))^3"),
                     parse_expr("0"), parse_expr("0"))
    st = make_state(phi_dot=10.0)
    with pytest.raises(ConstraintViolation) as exc:
        integrate_trajectory(st, ramp, 2.0, 0.01)
    v = exc.value
    assert 0.5 < v.time < 0.6
    assert v.partial.t[-1] == pytest.approx(v.time)
    assert len(v.partial.t) == round(v.time / 0.01) + 1


def test_constraint_tolerance_is_adjustable():
    st = make_state(phi_dot=10.0)
    tr = integrate_trajectory(st, ConstantField((1.0, 0.0, 0.0)), 0.5, 0.01,
                              constraint_tol=10.0)
    assert len(tr.t) == 51
    assert np.max(tr.residual) <= 10.0


def test_gauge_profile_feeds_energy_and_momentum():
    st = make_state()  # static velocity along +x
    tr = integrate_trajectory(st, ZeroField(), 2.0, 0.01,
                              gauge=ScalarField.from_text("2*t"))
    assert tr.e0 == pytest.approx(-2.0 * tr.t, abs=1e-12)
    assert tr.px == pytest.approx(-2.0 * tr.t, abs=1e-12)
    assert tr.pz == pytest.approx(np.zeros_like(tr.t), abs=1e-12)


def test_trajectory_shape_and_metadata():
    st = make_state(phi_dot=2.0, helicity=NEG, q=-1.5)
    tr = integrate_trajectory(st, ZeroField(), 1.0, 0.1)
    assert len(tr.t) == 11
    assert tr.helicity is NEG
    assert tr.q == -1.5
    assert tr.dt == 0.1
    assert tr.endpoint == (tr.x[-1], tr.y[-1], tr.z[-1])
    assert tr.distance_from_start()[0] == 0.0
    vnorm = np.sqrt(tr.vx**2 + tr.vy**2 + tr.vz**2)
    assert vnorm == pytest.approx(np.ones_like(vnorm), abs=1e-12)


def test_negative_helicity_mirrors_positive_under_flipped_field():
    # flipping both the helicity and the field leaves the angle history alone
    fwd = integrate_trajectory(make_state(phi_dot=10.0),
                               ConstantField((0.0, 0.0, 0.5)), 5.0, 1e-3)
    mir = integrate_trajectory(make_state(phi_dot=10.0, helicity=NEG),
                               ConstantField((0.0, 0.0, -0.5)), 5.0, 1e-3)
    assert np.array_equal(fwd.theta, mir.theta)
    assert np.array_equal(fwd.phi, mir.phi)
    assert np.array_equal(fwd.k, mir.k)
