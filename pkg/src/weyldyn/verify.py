"""Seeded verification battery for a scenario.

Every check here has an independent route to the same number: spinor
residuals go through finite differences of the actual Weyl operator,
field closed forms are held against numerical differentiation of their
potentials, and the algebraic identities are sampled over freshly drawn
laws and gauge functions rather than the scenario alone.  The battery
is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expressions import AngleLaw, ScalarField
from .observables import (kinetic_momentum_from_state, localization_from_rates,
                          velocity_from_angles)
from .potentials import (base_potential, degenerate_potential,
                         drive_field_closed_form, field_from_potential_numeric,
                         gauge_family_field, gauge_potential, kappa_vector)
from .scenario import Scenario
from .spinors import Event, Helicity, weyl_residual

__all__ = ["CheckResult", "RunReport", "run_verification"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.tolerance


@dataclass
class RunReport:
    scenario_name: str
    seed: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def format_text(self, extra_lines=()) -> str:
        lines = [f"scenario '{self.scenario_name}' seed {self.seed}: "
                 f"verification report"]
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            lines.append(f"  [{status}] {check.name:<28} "
                         f"measured {check.measured:.3e}  "
                         f"tol {check.tolerance:.1e}")
        lines.extend(extra_lines)
        n_pass = sum(1 for c in self.checks if c.passed)
        overall = "PASS" if self.passed else "FAIL"
        lines.append(f"overall: {overall} ({n_pass}/{len(self.checks)} checks)")
        return "\n".join(lines)


def _random_event(rng) -> Event:
    x, y, z, t = rng.uniform(-2.0, 2.0, size=4)
    return Event(float(x), float(y), float(z), float(t))


def _random_law(rng) -> AngleLaw:
    return AngleLaw.linear(
        theta0=float(rng.uniform(-3.0, 3.0)),
        omega1=float(rng.uniform(-3.0, 3.0)),
        phi0=float(rng.uniform(-3.0, 3.0)),
        omega2=float(rng.uniform(-3.0, 3.0)),
    )


def _random_gauge(rng, index: int) -> ScalarField:
    a, b, c, d = (float(v) for v in rng.uniform(-2.0, 2.0, size=4))
    forms = (
        ("a", {"a": a}),
        ("a*t", {"a": a}),
        ("a*sin(b*t)", {"a": a, "b": b}),
        ("a*x + b*y + c*z + d*t", {"a": a, "b": b, "c": c, "d": d}),
        ("a*z", {"a": a}),
        ("a*t + b*t^2", {"a": a, "b": b}),
    )
    text, params = forms[index % len(forms)]
    return ScalarField.from_text(text, params)


def run_verification(scenario: Scenario) -> RunReport:
    rng = np.random.default_rng(scenario.seed)
    n = scenario.sample_count
    step = scenario.fd_step
    tol_residual = scenario.tolerance
    tol_field = max(1e-6, 10.0 * step * step)
    tol_identity = 1e-12
    tol_kappa = 1e-14

    checks: list[CheckResult] = []

    # residual of the scenario's own spinor/potential pair; the
    # corrupt_b0 hook lands here so a corrupted file visibly fails
    base = base_potential(scenario.law, scenario.h, scenario.helicity)
    if scenario.corrupt_b0:
        from dataclasses import replace
        base = replace(base, b0_offset=scenario.corrupt_b0)
    worst = 0.0
    for _ in range(n):
        ev = _random_event(rng)
        worst = max(worst, weyl_residual(scenario.law, scenario.h, base,
                                         scenario.helicity, ev, step))
    checks.append(CheckResult("residual_base", worst, tol_residual))

    # the same spinor must keep solving after a shift along kappa, for
    # arbitrary gauge functions including spatially varying ones
    clean_base = base_potential(scenario.law, scenario.h, scenario.helicity)
    worst = 0.0
    for i in range(n):
        s = _random_gauge(rng, i)
        pot = degenerate_potential(clean_base, s)
        ev = _random_event(rng)
        worst = max(worst, weyl_residual(scenario.law, scenario.h, pot,
                                         scenario.helicity, ev, step))
    checks.append(CheckResult("residual_degenerate", worst, tol_residual))

    # mirrored family on fresh laws
    other = (Helicity.NEGATIVE if scenario.helicity is Helicity.POSITIVE
             else Helicity.POSITIVE)
    worst = 0.0
    for _ in range(max(1, n // 4)):
        law = _random_law(rng)
        pot = base_potential(law, None, other)
        ev = _random_event(rng)
        worst = max(worst, weyl_residual(law, None, pot, other, ev, step))
    checks.append(CheckResult("residual_mirror_family", worst, tol_residual))

    # algebraic identities over random laws, times and gauge values
    worst_speed = worst_kappa = worst_shell = 0.0
    worst_cross = worst_project = 0.0
    for _ in range(n):
        law = _random_law(rng)
        t = float(rng.uniform(-2.0, 2.0))
        s_val = float(rng.uniform(-2.0, 2.0))
        theta, phi = law.angles(t)
        theta_dot, phi_dot = law.rates(t)
        v = velocity_from_angles(theta, phi)
        worst_speed = max(worst_speed, abs(float(np.linalg.norm(v)) - 1.0))
        kappa = kappa_vector(law, t)
        worst_kappa = max(worst_kappa,
                          float(np.max(np.abs(np.array(kappa[1:]) + v))))
        for hel in (Helicity.POSITIVE, Helicity.NEGATIVE):
            km = kinetic_momentum_from_state(theta, phi, theta_dot, phi_dot,
                                             s_val, hel)
            p = km.momentum
            k = localization_from_rates(theta, theta_dot, phi_dot)
            shell = km.energy ** 2 - float(p @ p)
            worst_shell = max(worst_shell, abs(shell + k * k))
            worst_cross = max(
                worst_cross,
                abs(float(np.linalg.norm(np.cross(p, v))) - k),
            )
            worst_project = max(worst_project,
                                abs(float(p @ v) - km.energy))
    checks.append(CheckResult("unit_speed", worst_speed, tol_identity))
    checks.append(CheckResult("kappa_is_minus_velocity", worst_kappa, tol_kappa))
    checks.append(CheckResult("mass_shell_identity", worst_shell, tol_identity))
    checks.append(CheckResult("transverse_momentum_equals_k", worst_cross,
                              tol_identity))
    checks.append(CheckResult("momentum_projection_energy", worst_project,
                              tol_identity))

    # closed-form fields against numerical differentiation of potentials
    worst_drive = worst_drive_b = 0.0
    for _ in range(max(1, n // 4)):
        law = _random_law(rng)
        ev = _random_event(rng)
        for hel in (Helicity.POSITIVE, Helicity.NEGATIVE):
            pot = base_potential(law, None, hel)
            numeric = field_from_potential_numeric(pot, scenario.q, ev, step)
            closed = drive_field_closed_form(law, hel, scenario.q, ev.t)
            worst_drive = max(
                worst_drive,
                float(np.max(np.abs(numeric.e_vec - closed.e_vec))),
            )
            worst_drive_b = max(worst_drive_b,
                                float(np.max(np.abs(numeric.b_vec))))
    checks.append(CheckResult("drive_field_cross_check", worst_drive, tol_field))
    checks.append(CheckResult("drive_field_b_zero", worst_drive_b, tol_field))

    worst_gauge = 0.0
    for i in range(max(1, n // 4)):
        law = _random_law(rng)
        s = _random_gauge(rng, i)
        ev = _random_event(rng)
        pot = gauge_potential(law, scenario.helicity, s)
        numeric = field_from_potential_numeric(pot, scenario.q, ev, step)
        closed = gauge_family_field(law, s, scenario.q, ev)
        deviation = max(
            float(np.max(np.abs(numeric.e_vec - closed.e_vec))),
            float(np.max(np.abs(numeric.b_vec - closed.b_vec))),
        )
        worst_gauge = max(worst_gauge, deviation)
    checks.append(CheckResult("gauge_field_cross_check", worst_gauge, tol_field))

    return RunReport(scenario_name=scenario.name, seed=scenario.seed,
                     checks=checks)
