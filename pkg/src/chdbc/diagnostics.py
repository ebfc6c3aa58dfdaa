"""Per-state and per-step diagnostics: energies, masses, dissipation residual.

The signed defect of the discrete dissipation identity is the core
correctness oracle: for an exact solve it vanishes up to linear-algebra
round-off, for any time increment and any adsorption rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fem import FemOperators
from .potential import DoubleWell, discrete_energy_bnd, discrete_energy_bulk
from .stepper import Params, State, _dot


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    E_mod: float
    E_orig: float
    mass_bulk: float
    mass_bnd: float
    mass_combined: float
    r: float
    s: float
    diss_residual: float
    jump_norm: float

    FIELDS = (
        "t", "E_mod", "E_orig", "mass_bulk", "mass_bnd", "mass_combined",
        "r", "s", "diss_residual", "jump_norm",
    )


def _gradient_energies(ops: FemOperators, params: Params, phi: np.ndarray) -> tuple[float, float]:
    phi_bnd = phi[ops.trace]
    grad_bulk = 0.5 * params.epsilon * params.sigma * _dot(phi, ops.K_bulk @ phi)
    grad_bnd = 0.5 * params.delta * _dot(phi_bnd, ops.K_bnd @ phi_bnd)
    return grad_bulk, grad_bnd


def modified_energy(ops: FemOperators, params: Params, state: State) -> float:
    """Gradient energies plus the squared auxiliary scalars (the quantity the
    scheme provably dissipates)."""
    grad_bulk, grad_bnd = _gradient_energies(ops, params, state.phi)
    return (grad_bulk + grad_bnd
            + params.sigma / params.epsilon * state.r**2
            + state.s**2 / params.delta)


def original_energy(ops: FemOperators, params: Params,
                    dw_bulk: DoubleWell, dw_bnd: DoubleWell, state: State) -> float:
    """Gradient energies plus the lumped potential energies of phi itself."""
    grad_bulk, grad_bnd = _gradient_energies(ops, params, state.phi)
    e_bulk = discrete_energy_bulk(ops, dw_bulk, state.phi)
    e_bnd = discrete_energy_bnd(ops, dw_bnd, state.phi[ops.trace])
    return (grad_bulk + grad_bnd
            + params.sigma / params.epsilon * e_bulk
            + e_bnd / params.delta)


def masses(ops: FemOperators, params: Params, state: State) -> tuple[float, float, float]:
    """Lumped bulk and boundary masses and their conserved combination."""
    mass_bulk = _dot(ops.ML_bulk, state.phi)
    mass_bnd = _dot(ops.ML_bnd, state.phi[ops.trace])
    return mass_bulk, mass_bnd, mass_bulk + mass_bnd / params.beta


def jump_norm(ops: FemOperators, state: State, beta: float) -> float:
    """Lumped L2(Gamma) norm of beta*theta - trace(mu)."""
    jump = beta * state.theta - state.mu[ops.trace]
    return math.sqrt(_dot(ops.ML_bnd, jump**2))


def energy_identity_residual(ops: FemOperators, params: Params,
                             prev: State, next_state: State) -> float:
    """Signed defect of the per-step dissipation identity.

    The identity balances the drop of the modified energy against the
    increment penalties, the mobility dissipation, and (for finite xi) the
    lumped jump term.  Magnitude at solver accuracy for an accepted step.
    """
    p = params
    d_phi = next_state.phi - prev.phi
    d_phi_bnd = d_phi[ops.trace]
    theta = next_state.theta
    mu = next_state.mu

    e_next = modified_energy(ops, p, next_state)
    e_prev = modified_energy(ops, p, prev)
    increment = (0.5 * p.epsilon * p.sigma * _dot(d_phi, ops.K_bulk @ d_phi)
                 + 0.5 * p.delta * _dot(d_phi_bnd, ops.K_bnd @ d_phi_bnd)
                 + p.sigma / p.epsilon * (next_state.r - prev.r) ** 2
                 + (next_state.s - prev.s) ** 2 / p.delta)
    dissipation = p.tau * (p.m * _dot(mu, ops.K_bulk @ mu)
                           + p.m_gamma * _dot(theta, ops.K_bnd @ theta))
    total = (e_next - e_prev) + increment + dissipation
    if not math.isinf(p.xi):
        jump = p.beta * theta - mu[ops.trace]
        total += p.xi * p.tau * p.m * _dot(ops.ML_bnd, jump**2)
    return total


def diagnostics_row(ops: FemOperators, params: Params,
                    dw_bulk: DoubleWell, dw_bnd: DoubleWell,
                    prev: State | None, state: State) -> DiagnosticsRow:
    """Assemble one record; residual and jump norm are zero at t = 0 where mu
    and theta are not defined by the scheme."""
    mass_bulk, mass_bnd, mass_combined = masses(ops, params, state)
    if prev is None:
        residual = 0.0
        jump = 0.0
    else:
        residual = energy_identity_residual(ops, params, prev, state)
        jump = jump_norm(ops, state, params.beta)
    return DiagnosticsRow(
        t=state.t,
        E_mod=modified_energy(ops, params, state),
        E_orig=original_energy(ops, params, dw_bulk, dw_bnd, state),
        mass_bulk=mass_bulk,
        mass_bnd=mass_bnd,
        mass_combined=mass_combined,
        r=state.r,
        s=state.s,
        diss_residual=residual,
        jump_norm=jump,
    )


def write_diagnostics_csv(rows, path) -> None:
    """Stable CSV schema, one row per record; repr keeps full precision."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(DiagnosticsRow.FIELDS) + "\n")
        for row in rows:
            fh.write(",".join(repr(getattr(row, name)) for name in DiagnosticsRow.FIELDS) + "\n")


class DiagnosticsRecorder:
    """Run sink collecting one DiagnosticsRow per accepted step (plus t=0)."""

    def __init__(self, ops: FemOperators, params: Params,
                 dw_bulk: DoubleWell, dw_bnd: DoubleWell, every: int = 1):
        self.ops = ops
        self.params = params
        self.dw_bulk = dw_bulk
        self.dw_bnd = dw_bnd
        self.every = every
        self.rows: list[DiagnosticsRow] = []

    def __call__(self, prev: State | None, state: State) -> None:
        if prev is not None and state.n % self.every != 0:
            return
        self.rows.append(
            diagnostics_row(self.ops, self.params, self.dw_bulk, self.dw_bnd, prev, state)
        )
