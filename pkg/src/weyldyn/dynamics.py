"""Trajectory integration under applied electric field programs.

The drive field acts on the spinor state only through the two angle
accelerations.  Inverting the closed-form drive field yields

    theta'' = 2 q (Ex sin(phi) - Ey cos(phi))
    phi''   = -2 q Ez

while the transverse x-y components must additionally satisfy
theta' phi' = 2 q (Ex cos(phi) + Ey sin(phi)).  That compatibility gap
is reported as constraint_residual; fields violating it do not drive
any member of the family and the integrator refuses to continue past a
configurable tolerance.  Negative helicity feels the opposite field, so
E is negated before the inversion.

Integration is classic fourth-order Runge-Kutta on the state
(position, theta, phi, theta', phi') over a uniform grid.  k is always
evaluated from the integrated rates, never integrated itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .expressions import Expr, ScalarField, eval_expr
from .spinors import Helicity

__all__ = [
    "ParticleState",
    "AngleAccel",
    "FieldProgram",
    "ZeroField",
    "ConstantField",
    "ExprField",
    "DriveField",
    "Trajectory",
    "ConstraintViolation",
    "accel_from_field",
    "integrate_trajectory",
]


@dataclass(frozen=True)
class ParticleState:
    position: tuple[float, float, float]
    theta: float
    phi: float
    theta_dot: float
    phi_dot: float
    helicity: Helicity
    q: float

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("charge q must be nonzero")


class AngleAccel(NamedTuple):
    theta_ddot: float
    phi_ddot: float
    constraint_residual: float


def accel_from_field(state: ParticleState,
                     e_field: tuple[float, float, float]) -> AngleAccel:
    """Angle accelerations produced by an applied electric field."""
    ex, ey, ez = e_field
    q_eff = state.q * state.helicity.sign
    sp, cp = math.sin(state.phi), math.cos(state.phi)
    theta_ddot = 2.0 * q_eff * (ex * sp - ey * cp)
    phi_ddot = -2.0 * q_eff * ez
    residual = abs(state.theta_dot * state.phi_dot
                   - 2.0 * q_eff * (ex * cp + ey * sp))
    return AngleAccel(theta_ddot, phi_ddot, residual)


class FieldProgram:
    """Applied electric field history E(t).  Magnetic drives do not
    couple to the angle dynamics, so any nonzero B is rejected up
    front."""

    def field_at(self, t: float) -> tuple[float, float, float]:
        raise NotImplementedError

    def sample(self, ts: np.ndarray) -> np.ndarray:
        out = np.empty((len(ts), 3))
        for i, t in enumerate(ts):
            out[i] = self.field_at(float(t))
        return out

    @staticmethod
    def _check_b(b) -> None:
        if b is not None and any(component != 0 for component in b):
            raise ValueError("magnetic drive components must vanish")


class ZeroField(FieldProgram):
    def field_at(self, t):
        return (0.0, 0.0, 0.0)

    def sample(self, ts):
        return np.zeros((len(ts), 3))


class ConstantField(FieldProgram):
    def __init__(self, e: tuple[float, float, float], b=None):
        self._check_b(b)
        self.e = (float(e[0]), float(e[1]), float(e[2]))

    def field_at(self, t):
        return self.e

    def sample(self, ts):
        return np.tile(self.e, (len(ts), 1))


class ExprField(FieldProgram):
    """Components given as expressions in t."""

    def __init__(self, ex: Expr, ey: Expr, ez: Expr, b=None):
        self._check_b(b)
        for component in (ex, ey, ez):
            extra = component.free_variables() - {"t"}
            if extra:
                names = ", ".join(sorted(extra))
                raise ValueError(f"field expressions may only use t, found: {names}")
        self.exprs = (ex, ey, ez)

    def field_at(self, t):
        return tuple(eval_expr(c, t=t) for c in self.exprs)

    def sample(self, ts):
        out = np.empty((len(ts), 3))
        for i, component in enumerate(self.exprs):
            out[:, i] = np.zeros_like(ts) + component.evaluate({"t": ts})
        return out


class DriveField(FieldProgram):
    """Closed-form drive field of a nominal angle law.

    Applying it reproduces exactly that law in the integrator: the
    x-y components satisfy the compatibility constraint along the
    nominal motion by construction.
    """

    def __init__(self, law, helicity: Helicity, q: float):
        if q == 0:
            raise ValueError("charge q must be nonzero")
        self.law = law
        self.helicity = helicity
        self.q = q

    def field_at(self, t):
        from .potentials import drive_field_closed_form
        return drive_field_closed_form(self.law, self.helicity, self.q, t).e

    def sample(self, ts):
        law = self.law
        phi = law.phi.value(ts)
        theta_dot = law.theta.derivative(ts)
        phi_dot = law.phi.derivative(ts)
        theta_ddot = law.theta.second_derivative(ts)
        phi_ddot = law.phi.second_derivative(ts)
        sp, cp = np.sin(phi), np.cos(phi)
        scale = self.helicity.sign / (2.0 * self.q)
        out = np.empty((len(ts), 3))
        out[:, 0] = scale * (cp * theta_dot * phi_dot + sp * theta_ddot)
        out[:, 1] = scale * (sp * theta_dot * phi_dot - cp * theta_ddot)
        out[:, 2] = np.zeros_like(ts) - scale * phi_ddot
        return out


@dataclass
class Trajectory:
    """Uniformly sampled integration result with per-sample observables."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    theta_dot: np.ndarray
    phi_dot: np.ndarray
    k: np.ndarray
    e0: np.ndarray
    px: np.ndarray
    py: np.ndarray
    pz: np.ndarray
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    residual: np.ndarray
    helicity: Helicity = Helicity.POSITIVE
    q: float = 1.0
    dt: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def endpoint(self) -> tuple[float, float, float]:
        return float(self.x[-1]), float(self.y[-1]), float(self.z[-1])

    def distance_from_start(self) -> np.ndarray:
        return np.sqrt((self.x - self.x[0]) ** 2 + (self.y - self.y[0]) ** 2
                       + (self.z - self.z[0]) ** 2)

    def speed_drift(self) -> float:
        """Largest deviation of |v| from 1 over the run."""
        speed = np.sqrt(self.vx ** 2 + self.vy ** 2 + self.vz ** 2)
        return float(np.max(np.abs(speed - 1.0)))


class ConstraintViolation(RuntimeError):
    """Applied field is incompatible with the angle dynamics."""

    def __init__(self, time: float, residual: float, tolerance: float,
                 partial: Trajectory):
        super().__init__(
            f"field/motion compatibility residual {residual:.6g} exceeds "
            f"tolerance {tolerance:.6g} at t = {time:.6g}"
        )
        self.time = time
        self.residual = residual
        self.tolerance = tolerance
        self.partial = partial


def _gauge_samples(gauge: ScalarField | None, ts: np.ndarray) -> np.ndarray:
    if gauge is None:
        return np.zeros_like(ts)
    if not gauge.is_time_only:
        raise ValueError("trajectory gauge function must depend on t only")
    return gauge.sample_time(ts)


def integrate_trajectory(initial: ParticleState, program: FieldProgram,
                         t_end: float, dt: float, *,
                         gauge: ScalarField | None = None,
                         constraint_tol: float = 1e-6) -> Trajectory:
    """Integrate the driven state over [0, t_end] on a grid of step dt.

    Raises ConstraintViolation (carrying the partial trajectory) as soon
    as the applied field fails the x-y compatibility check beyond
    constraint_tol at a grid point.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n = int(round(t_end / dt))
    if n < 1:
        raise ValueError("t_end shorter than one step")
    if dt < t_end * 1e-14:
        raise ValueError("time step underflows the grid resolution")

    ts = np.arange(n + 1) * dt
    half_ts = np.arange(2 * n + 1) * (0.5 * dt)
    fields = program.sample(half_ts)

    theta_a = np.empty(n + 1)
    phi_a = np.empty(n + 1)
    theta_dot_a = np.empty(n + 1)
    phi_dot_a = np.empty(n + 1)
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    zs = np.empty(n + 1)

    q_eff = initial.q * initial.helicity.sign
    sin, cos = math.sin, math.cos

    def rhs(theta, phi, theta_dot, phi_dot, e):
        st, ct = sin(theta), cos(theta)
        sp, cp = sin(phi), cos(phi)
        tdd = 2.0 * q_eff * (e[0] * sp - e[1] * cp)
        pdd = -2.0 * q_eff * e[2]
        return st * cp, st * sp, ct, theta_dot, phi_dot, tdd, pdd

    x, y, z = initial.position
    theta, phi = initial.theta, initial.phi
    theta_dot, phi_dot = initial.theta_dot, initial.phi_dot

    filled = 0
    violation = None
    for i in range(n + 1):
        theta_a[i] = theta
        phi_a[i] = phi
        theta_dot_a[i] = theta_dot
        phi_dot_a[i] = phi_dot
        xs[i] = x
        ys[i] = y
        zs[i] = z
        filled = i + 1

        e0_field = fields[2 * i]
        residual = abs(theta_dot * phi_dot - 2.0 * q_eff
                       * (e0_field[0] * cos(phi) + e0_field[1] * sin(phi)))
        if residual > constraint_tol:
            violation = (float(ts[i]), residual)
            break
        if i == n:
            break

        em_field = fields[2 * i + 1]
        e1_field = fields[2 * i + 2]
        h = dt

        k1 = rhs(theta, phi, theta_dot, phi_dot, e0_field)
        k2 = rhs(theta + 0.5 * h * k1[3], phi + 0.5 * h * k1[4],
                 theta_dot + 0.5 * h * k1[5], phi_dot + 0.5 * h * k1[6],
                 em_field)
        k3 = rhs(theta + 0.5 * h * k2[3], phi + 0.5 * h * k2[4],
                 theta_dot + 0.5 * h * k2[5], phi_dot + 0.5 * h * k2[6],
                 em_field)
        k4 = rhs(theta + h * k3[3], phi + h * k3[4],
                 theta_dot + h * k3[5], phi_dot + h * k3[6],
                 e1_field)

        sixth = h / 6.0
        x += sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        y += sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        z += sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        theta += sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
        phi += sixth * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
        theta_dot += sixth * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])
        phi_dot += sixth * (k1[6] + 2.0 * (k2[6] + k3[6]) + k4[6])

    traj = _assemble(ts[:filled], xs[:filled], ys[:filled], zs[:filled],
                     theta_a[:filled], phi_a[:filled],
                     theta_dot_a[:filled], phi_dot_a[:filled],
                     fields[0:2 * filled:2], gauge, initial, dt)
    if violation is not None:
        raise ConstraintViolation(violation[0], violation[1], constraint_tol,
                                  traj)
    return traj


def _assemble(ts, xs, ys, zs, theta_a, phi_a, theta_dot_a, phi_dot_a,
              fields, gauge, initial: ParticleState, dt: float) -> Trajectory:
    sign = initial.helicity.sign
    st, ct = np.sin(theta_a), np.cos(theta_a)
    sp, cp = np.sin(phi_a), np.cos(phi_a)
    s_vals = _gauge_samples(gauge, ts)
    q_eff = initial.q * sign

    k = 0.5 * np.hypot(st * phi_dot_a, theta_dot_a)
    e0 = -sign * 0.5 * ct * phi_dot_a - s_vals
    px = sign * 0.5 * sp * theta_dot_a - s_vals * st * cp
    py = -sign * 0.5 * cp * theta_dot_a - s_vals * st * sp
    pz = -sign * 0.5 * phi_dot_a - s_vals * ct
    residual = np.abs(theta_dot_a * phi_dot_a
                      - 2.0 * q_eff * (fields[:, 0] * cp + fields[:, 1] * sp))

    return Trajectory(
        t=ts, x=xs, y=ys, z=zs,
        vx=st * cp, vy=st * sp, vz=ct,
        theta=theta_a, phi=phi_a,
        theta_dot=theta_dot_a, phi_dot=phi_dot_a,
        k=k, e0=e0, px=px, py=py, pz=pz,
        ex=fields[:, 0].copy(), ey=fields[:, 1].copy(), ez=fields[:, 2].copy(),
        residual=residual,
        helicity=initial.helicity, q=initial.q, dt=dt,
    )
