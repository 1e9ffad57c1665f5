"""Two-component spinor families and the Weyl operator residual.

The package works with the closed-form spinor family parameterized by an
angle history (theta(t), phi(t)) and a free phase h(x, y, z, t):

    positive helicity: ( cos(theta/2), e^{i phi} sin(theta/2) ) e^{i h}
    negative helicity: ( -sin(theta/2), e^{i phi} cos(theta/2) ) e^{i h}

Both are unit norm by construction.  `weyl_residual` measures how well a
spinor/potential pair satisfies the first-order Weyl equation for its
helicity, using central finite differences for the derivatives; it is
the package's independent check that a potential actually belongs to a
given spinor.

Only the two-component forms live here.  The same construction embeds in
the massless four-component (Dirac) setting, but that wrapper is out of
scope for this package.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .expressions import AngleLaw, ScalarField

__all__ = [
    "Helicity",
    "Event",
    "Spinor",
    "PAULI",
    "MIRROR_PAULI",
    "spinor_components",
    "build_spinor",
    "weyl_residual",
]


class Helicity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def sign(self) -> int:
        return 1 if self is Helicity.POSITIVE else -1


_SIGMA0 = np.eye(2, dtype=complex)
_SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)

#: (identity, sigma_x, sigma_y, sigma_z)
PAULI = (_SIGMA0, _SIGMA1, _SIGMA2, _SIGMA3)

#: mirrored set used by the negative helicity equation: spatial signs flipped
MIRROR_PAULI = (_SIGMA0, -_SIGMA1, -_SIGMA2, -_SIGMA3)


@dataclass(frozen=True)
class Event:
    """Spacetime point."""

    x: float
    y: float
    z: float
    t: float

    def __post_init__(self):
        for name in ("x", "y", "z", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite event coordinate {name}")

    def shifted(self, axis: str, delta: float) -> "Event":
        if axis == "x":
            return Event(self.x + delta, self.y, self.z, self.t)
        if axis == "y":
            return Event(self.x, self.y + delta, self.z, self.t)
        if axis == "z":
            return Event(self.x, self.y, self.z + delta, self.t)
        if axis == "t":
            return Event(self.x, self.y, self.z, self.t + delta)
        raise ValueError(f"unknown axis '{axis}'")


@dataclass(frozen=True)
class Spinor:
    c1: complex
    c2: complex
    helicity: Helicity

    @property
    def norm_sq(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2

    def as_vector(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)


def spinor_components(theta: float, phi: float, helicity: Helicity):
    """Unit spinor for the given angles, before the overall phase."""
    half = 0.5 * theta
    phase = cmath.exp(1j * phi)
    if helicity is Helicity.POSITIVE:
        return complex(math.cos(half)), phase * math.sin(half)
    return complex(-math.sin(half)), phase * math.cos(half)


def build_spinor(law: AngleLaw, h: ScalarField | None, helicity: Helicity,
                 ev: Event) -> Spinor:
    theta, phi = law.angles(ev.t)
    c1, c2 = spinor_components(theta, phi, helicity)
    if h is not None:
        overall = cmath.exp(1j * h.value(ev.x, ev.y, ev.z, ev.t))
        c1 *= overall
        c2 *= overall
    return Spinor(c1, c2, helicity)


def _spinor_vector(law, h, helicity, ev) -> np.ndarray:
    return build_spinor(law, h, helicity, ev).as_vector()


def weyl_residual(law: AngleLaw, h: ScalarField | None, potential,
                  helicity: Helicity, ev: Event, step: float = 1e-5) -> float:
    """Norm of the Weyl equation applied to the spinor at one event.

    Derivatives are second-order central differences with the given
    step, so the residual of an exact spinor/potential pair vanishes as
    O(step^2).  The potential only needs a `components(ev)` method
    returning its four components at the event; no normalization is
    applied to the result.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    sigma = PAULI if helicity is Helicity.POSITIVE else MIRROR_PAULI
    center = _spinor_vector(law, h, helicity, ev)
    inv = 0.5 / step

    residual = np.zeros(2, dtype=complex)
    for axis, matrix in zip(("t", "x", "y", "z"), sigma):
        plus = _spinor_vector(law, h, helicity, ev.shifted(axis, step))
        minus = _spinor_vector(law, h, helicity, ev.shifted(axis, -step))
        residual += 1j * (matrix @ ((plus - minus) * inv))

    b = potential.components(ev)
    for coeff, matrix in zip(b, sigma):
        residual += coeff * (matrix @ center)

    return float(np.sqrt(abs(residual[0]) ** 2 + abs(residual[1]) ** 2))
