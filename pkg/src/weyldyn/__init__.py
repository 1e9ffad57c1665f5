"""Closed-form Weyl spinor dynamics toolkit."""

from .expressions import (AngleLaw, ExprLaw, LinearLaw, ScalarField,
                          diff_expr, eval_expr, parse_expr, plane_wave_phase)
from .spinors import Event, Helicity, Spinor, build_spinor, weyl_residual
from .potentials import (EMField, FourPotentialField, base_potential,
                         degenerate_potential, drive_field_closed_form,
                         energy_control_field, field_from_potential_numeric,
                         gauge_family_field, gauge_potential, k_control_field,
                         kappa_vector)
from .observables import (KineticMomentum, energy_rate, kinetic_momentum,
                          localization_k, mass_shell_defect,
                          momentum_noncollinearity, si_rates,
                          uncertainty_relation, velocity)
from .dynamics import (ConstraintViolation, FieldProgram, ParticleState,
                       Trajectory, accel_from_field, integrate_trajectory)
from .scenario import (Scenario, ScenarioError, load_scenario,
                       resolve_scenario, run_scenario)
from .verify import RunReport, run_verification

__version__ = "0.1.0"
