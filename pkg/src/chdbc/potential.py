"""Shifted quartic double-well potential, discrete energies and nodal forces.

The shift keeps the lumped energies strictly positive, which is what makes
the square-root auxiliary variables well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import FemOperators


class EnergyFloorError(RuntimeError):
    """Discrete potential energy fell below its configured floor."""


@dataclass(frozen=True)
class DoubleWell:
    """W(x) = (1 - x^2)^2 / 4 + shift with shift > 0."""

    shift: float

    def __post_init__(self):
        if self.shift <= 0:
            raise ValueError(f"shift must be positive, got {self.shift}")

    def value(self, x):
        return 0.25 * (1.0 - np.asarray(x) ** 2) ** 2 + self.shift

    def derivative(self, x):
        x = np.asarray(x)
        return x**3 - x


def discrete_energy_bulk(ops: FemOperators, dw: DoubleWell, phi: np.ndarray) -> float:
    """Lumped bulk potential energy sum_i ML_i W(phi_i); >= shift * |Omega|."""
    return float(np.sum(ops.ML_bulk * dw.value(phi)))


def discrete_energy_bnd(ops: FemOperators, dw: DoubleWell, phi_bnd: np.ndarray) -> float:
    """Lumped boundary potential energy from boundary-local nodal values."""
    return float(np.sum(ops.ML_bnd * dw.value(phi_bnd)))


def nodal_force_bulk(ops: FemOperators, dw: DoubleWell, phi: np.ndarray) -> np.ndarray:
    """Vector b with b_i = ML_i W'(phi_i); b.psi is the lumped W'(phi)psi integral."""
    return ops.ML_bulk * dw.derivative(phi)


def nodal_force_bnd(ops: FemOperators, dw: DoubleWell, phi_bnd: np.ndarray) -> np.ndarray:
    """Boundary analogue of nodal_force_bulk."""
    return ops.ML_bnd * dw.derivative(phi_bnd)


def sav_radius(energy: float, floor: float = 0.0) -> float:
    """Square root of a lumped potential energy.

    The floor is a configuration sanity check: the shifted quartic keeps the
    energy above shift * measure automatically, so tripping it signals a bug.
    """
    if energy <= 0.0 or energy < floor:
        raise EnergyFloorError(
            f"potential energy {energy!r} below floor {floor!r}; "
            "check the potential shift configuration"
        )
    return float(np.sqrt(energy))
