"""Runtime invariant suite: energy identity, conservation, limit constraints.

Used by the `validate` CLI subcommand and by the test suite.  Every check
returns its worst observed defect so failures are diagnosable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import energy_identity_residual, jump_norm, masses, modified_energy
from .eoc import double_wells, unit_square_problem
from .scenarios import Scenario
from .stepper import SavStepper

RESIDUAL_TOL = 1e-9
MASS_TOL = 1e-11
JUMP_TOL = 1e-10
FIXED_POINT_TOL = 1e-11


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def check_dissipation_run(scenario: Scenario, level: int, xi: float,
                          n_steps: int) -> list[CheckResult]:
    """Run n_steps and verify the energy identity, monotonicity, conservation,
    and (at xi = inf) the nodal constraint between theta and mu."""
    params = replace(scenario.params, xi=xi,
                     t_end=n_steps * scenario.params.tau)
    mesh, bnd, ops = unit_square_problem(level)
    dw_bulk, dw_bnd = double_wells(replace(scenario, params=params), ops)
    stepper = SavStepper(ops, params, dw_bulk, dw_bnd)
    phi0 = scenario.phi0(mesh.vertices[:, 0], mesh.vertices[:, 1])

    state = stepper.init_state(phi0)
    mass0 = masses(ops, params, state)
    e_prev = modified_energy(ops, params, state)
    worst_residual = 0.0
    worst_mono = 0.0
    worst_mass = np.zeros(3)
    worst_jump = 0.0
    for _ in range(n_steps):
        prev = state
        state = stepper.step(prev)
        res = energy_identity_residual(ops, params, prev, state)
        e_now = modified_energy(ops, params, state)
        worst_residual = max(worst_residual, abs(res) / (1.0 + e_prev))
        worst_mono = max(worst_mono, e_now - e_prev)
        m = masses(ops, params, state)
        for k in range(3):
            worst_mass[k] = max(worst_mass[k],
                                abs(m[k] - mass0[k]) / (1.0 + abs(mass0[k])))
        if math.isinf(xi):
            worst_jump = max(worst_jump,
                             float(np.max(np.abs(params.beta * state.theta
                                                 - state.mu[ops.trace]))))
        e_prev = e_now

    label = f"xi={'inf' if math.isinf(xi) else xi}"
    results = [
        CheckResult(f"energy identity ({label})", worst_residual <= RESIDUAL_TOL,
                    f"max relative residual {worst_residual:.3e}"),
        CheckResult(f"energy monotonicity ({label})", worst_mono <= 0.0,
                    f"max energy increase {worst_mono:.3e}"),
        CheckResult(f"combined mass ({label})", worst_mass[2] <= MASS_TOL,
                    f"max relative drift {worst_mass[2]:.3e}"),
    ]
    if xi == 0.0:
        results.append(CheckResult(
            f"individual masses ({label})",
            worst_mass[0] <= MASS_TOL and worst_mass[1] <= MASS_TOL,
            f"bulk drift {worst_mass[0]:.3e}, boundary drift {worst_mass[1]:.3e}"))
    if math.isinf(xi):
        results.append(CheckResult(
            f"beta*theta = mu constraint ({label})", worst_jump <= JUMP_TOL,
            f"max nodal jump {worst_jump:.3e}"))
    return results


def check_fixed_point(scenario: Scenario, level: int, value: float,
                      n_steps: int = 50) -> CheckResult:
    """Uniform states with vanishing potential derivative must be stationary."""
    params = replace(scenario.params, t_end=n_steps * scenario.params.tau)
    mesh, bnd, ops = unit_square_problem(level)
    dw_bulk, dw_bnd = double_wells(replace(scenario, params=params), ops)
    stepper = SavStepper(ops, params, dw_bulk, dw_bnd)
    state = stepper.init_state(np.full(ops.n_bulk, value))
    r0, s0 = state.r, state.s
    worst = 0.0
    for _ in range(n_steps):
        state = stepper.step(state)
        worst = max(
            worst,
            float(np.max(np.abs(state.phi - value))),
            float(np.max(np.abs(state.mu))),
            float(np.max(np.abs(state.theta))) if state.theta.size else 0.0,
        )
    scalar_drift = max(abs(state.r - r0), abs(state.s - s0))
    ok = worst <= FIXED_POINT_TOL and scalar_drift <= 1e-12
    return CheckResult(f"fixed point phi={value}", ok,
                       f"max field deviation {worst:.3e}, scalar drift {scalar_drift:.3e}")


def run_validation(scenario: Scenario, level: int, n_steps: int = 200,
                   xis=(0.0, 1.0, math.inf)) -> list[CheckResult]:
    """Full invariant suite at one mesh level."""
    results = []
    for xi in xis:
        results.extend(check_dissipation_run(scenario, level, xi, n_steps))
    results.append(check_fixed_point(scenario, level, 0.0))
    results.append(check_fixed_point(scenario, level, 1.0))
    return results
