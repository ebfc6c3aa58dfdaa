"""Linear SAV time stepping for the bulk-surface Cahn-Hilliard system.

One step solves a single sparse linear system in the unknowns
(phi, mu, theta, r, s) of size 2*N_bulk + N_bnd + 2.  The auxiliary scalars
r and s are kept as explicit unknowns so the matrix stays sparse apart from
two extra rows and columns.  The step is unconditionally stable: it
dissipates the modified energy exactly, for every time increment and every
adsorption rate xi in [0, inf].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import FemOperators
from .potential import (
    DoubleWell,
    discrete_energy_bnd,
    discrete_energy_bulk,
    nodal_force_bnd,
    nodal_force_bulk,
    sav_radius,
)

RESIDUAL_RTOL = 1e-11
MASS_RTOL = 1e-11


class StepperError(RuntimeError):
    """Raised when a step cannot be completed (singular system, NaN, drift)."""


@dataclass(frozen=True)
class Params:
    """Physical and discretization parameters.

    xi may be any value in [0, inf]; math.inf selects the instantaneous
    adsorption limit where beta*theta is tied to the trace of mu.
    """

    m: float = 0.01
    m_gamma: float = 0.02
    epsilon: float = 0.02
    sigma: float = 2.0
    delta: float = 0.02
    beta: float = 1.0
    xi: float = 0.0
    tau: float = 2e-5
    t_end: float = 1.0

    def __post_init__(self):
        for name in ("m", "m_gamma", "epsilon", "sigma", "delta", "beta", "tau", "t_end"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not (self.xi >= 0):
            raise ValueError(f"xi must be >= 0 or inf, got {self.xi}")

    @property
    def xi_weights(self) -> tuple[float, float]:
        """(w1, w2) = (1/(1+xi), xi/(1+xi)), with (0, 1) at xi = inf."""
        if math.isinf(self.xi):
            return 0.0, 1.0
        return 1.0 / (1.0 + self.xi), self.xi / (1.0 + self.xi)


@dataclass(frozen=True)
class State:
    """Discrete unknowns at one time level."""

    phi: np.ndarray
    mu: np.ndarray
    theta: np.ndarray
    r: float
    s: float
    t: float
    n: int


@dataclass(frozen=True)
class StepSystem:
    """Assembled linear system; unknown layout [phi | mu | theta | r | s]."""

    matrix: sp.csc_matrix
    rhs: np.ndarray
    n_bulk: int
    n_bnd: int


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # pairwise summation; deterministic regardless of BLAS threading
    return float(np.sum(a * b))


class SavStepper:
    """Assembles and solves one implicit SAV step at a time.

    The blocks that do not depend on the previous state are precomputed once;
    per step only the force couplings and the right-hand side change.
    """

    def __init__(self, ops: FemOperators, params: Params,
                 dw_bulk: DoubleWell, dw_bnd: DoubleWell, solver: str = "lu"):
        if solver not in ("lu", "gmres"):
            raise ValueError(f"unknown solver {solver!r}")
        self.ops = ops
        self.params = params
        self.dw_bulk = dw_bulk
        self.dw_bnd = dw_bnd
        self.solver = solver

        p = params
        T = ops.trace_matrix
        nv, nb = ops.n_bulk, ops.n_bnd
        w1, w2 = p.xi_weights

        # bulk evolution rows, scaled by tau to balance magnitudes
        mass_combined = ops.ML_bulk.copy()
        mass_combined[ops.trace] += ops.ML_bnd / p.beta
        self._mass_combined = mass_combined
        self._A_phi = sp.diags(mass_combined)
        self._A_mu = (p.tau * p.m) * ops.K_bulk
        self._A_theta = (p.tau * p.m_gamma / p.beta) * (T.T @ ops.K_bnd)

        # boundary evolution rows
        mlg = sp.diags(ops.ML_bnd)
        self._B_phi = (w1 / p.tau) * (mlg @ T)
        self._B_mu = (-w2 * p.beta * p.m) * (mlg @ T)
        self._B_theta = w1 * p.m_gamma * ops.K_bnd + (w2 * p.beta**2 * p.m) * mlg

        # potential rows
        self._C_phi = -(p.epsilon * p.sigma) * ops.K_bulk - p.delta * (T.T @ ops.K_bnd @ T)
        self._C_mu = sp.diags(ops.ML_bulk)
        self._C_theta = T.T @ mlg

        self._volume = float(np.sum(ops.ML_bulk))
        self._perimeter = float(np.sum(ops.ML_bnd))
        self._floor_bulk = 0.5 * dw_bulk.shift * self._volume
        self._floor_bnd = 0.5 * dw_bnd.shift * self._perimeter
        self._nv, self._nb = nv, nb

    # -- state handling ---------------------------------------------------

    def init_state(self, phi0: np.ndarray) -> State:
        """Initial state: r and s are the square roots of the lumped energies."""
        phi0 = np.asarray(phi0, dtype=float)
        if phi0.shape != (self._nv,):
            raise ValueError(f"phi0 must have length {self._nv}")
        e_bulk = discrete_energy_bulk(self.ops, self.dw_bulk, phi0)
        e_bnd = discrete_energy_bnd(self.ops, self.dw_bnd, phi0[self.ops.trace])
        r = sav_radius(e_bulk, self._floor_bulk)
        s = sav_radius(e_bnd, self._floor_bnd)
        return State(
            phi=phi0.copy(),
            mu=np.zeros(self._nv),
            theta=np.zeros(self._nb),
            r=r,
            s=s,
            t=0.0,
            n=0,
        )

    def combined_mass(self, phi: np.ndarray) -> float:
        return _dot(self._mass_combined, phi)

    # -- one step ----------------------------------------------------------

    def assemble_step_system(self, prev: State) -> StepSystem:
        ops, p = self.ops, self.params
        phi_bnd = prev.phi[ops.trace]
        e_bulk = discrete_energy_bulk(ops, self.dw_bulk, prev.phi)
        e_bnd = discrete_energy_bnd(ops, self.dw_bnd, phi_bnd)
        if e_bulk < self._floor_bulk or e_bnd < self._floor_bnd:
            raise StepperError(
                f"potential energy below floor (bulk {e_bulk!r}, boundary {e_bnd!r})"
            )
        sqrt_eb = math.sqrt(e_bulk)
        sqrt_eg = math.sqrt(e_bnd)
        b_bulk = nodal_force_bulk(ops, self.dw_bulk, prev.phi)
        b_bnd = nodal_force_bnd(ops, self.dw_bnd, phi_bnd)
        b_bnd_scattered = np.zeros(self._nv)
        b_bnd_scattered[ops.trace] = b_bnd

        col_r = sp.csc_matrix(
            (-(p.sigma / p.epsilon) / sqrt_eb * b_bulk).reshape(-1, 1)
        )
        col_s = sp.csc_matrix(
            (-(1.0 / p.delta) / sqrt_eg * b_bnd_scattered).reshape(-1, 1)
        )
        row_r = sp.csr_matrix((-b_bulk / (2.0 * sqrt_eb)).reshape(1, -1))
        row_s = sp.csr_matrix((-b_bnd_scattered / (2.0 * sqrt_eg)).reshape(1, -1))
        one = sp.csr_matrix(np.array([[1.0]]))

        matrix = sp.bmat(
            [
                [self._A_phi, self._A_mu, self._A_theta, None, None],
                [self._B_phi, self._B_mu, self._B_theta, None, None],
                [self._C_phi, self._C_mu, self._C_theta, col_r, col_s],
                [row_r, None, None, one, None],
                [row_s, None, None, None, one],
            ],
            format="csc",
        )

        w1, _ = p.xi_weights
        rhs = np.concatenate(
            [
                self._mass_combined * prev.phi,
                (w1 / p.tau) * ops.ML_bnd * phi_bnd,
                np.zeros(self._nv),
                [prev.r - _dot(b_bulk, prev.phi) / (2.0 * sqrt_eb)],
                [prev.s - _dot(b_bnd, phi_bnd) / (2.0 * sqrt_eg)],
            ]
        )
        return StepSystem(matrix, rhs, self._nv, self._nb)

    def solve_step(self, system: StepSystem):
        """Solve the assembled system and split the solution vector."""
        if self.solver == "gmres":
            x = self._solve_gmres(system)
        else:
            x = self._solve_lu(system)
        if not np.all(np.isfinite(x)):
            raise StepperError("linear solve produced non-finite values")
        residual = np.max(np.abs(system.matrix @ x - system.rhs))
        tol = RESIDUAL_RTOL * (1.0 + np.max(np.abs(system.rhs)))
        if residual > tol:
            raise StepperError(
                f"linear solve residual {residual!r} exceeds tolerance {tol!r}"
            )
        nv, nb = system.n_bulk, system.n_bnd
        phi = x[:nv]
        mu = x[nv:2 * nv]
        theta = x[2 * nv:2 * nv + nb]
        r = float(x[2 * nv + nb])
        s = float(x[2 * nv + nb + 1])
        return phi, mu, theta, r, s

    def _solve_lu(self, system: StepSystem) -> np.ndarray:
        # row equilibration plus iterative refinement with extended-precision
        # residuals: the 1/tau scaling of the boundary rows otherwise leaves
        # the factorization error well above the stationarity tolerances
        A = system.matrix.tocsr()
        row_max = np.maximum.reduceat(np.abs(A.data), A.indptr[:-1])
        if not np.all(row_max > 0):
            raise StepperError("system matrix has an empty row")
        scale = 1.0 / row_max
        A_eq = (sp.diags(scale) @ A).tocsc()
        rhs_eq = system.rhs * scale
        try:
            lu = spla.splu(A_eq)
        except RuntimeError as exc:
            raise StepperError(f"sparse LU factorization failed: {exc}") from exc
        A_ld = A_eq.astype(np.longdouble)
        rhs_ld = rhs_eq.astype(np.longdouble)
        x = lu.solve(rhs_eq)
        for _ in range(3):
            residual = np.asarray(rhs_ld - A_ld @ x.astype(np.longdouble),
                                  dtype=np.float64)
            x = x + lu.solve(residual)
        return x

    def _solve_gmres(self, system: StepSystem) -> np.ndarray:
        ilu = spla.spilu(system.matrix, drop_tol=1e-8, fill_factor=20)
        precond = spla.LinearOperator(system.matrix.shape, ilu.solve)
        x, info = spla.gmres(
            system.matrix, system.rhs, M=precond, rtol=1e-14, atol=0.0,
            restart=60, maxiter=400,
        )
        if info != 0:
            raise StepperError(f"GMRES did not converge (info={info})")
        return x

    def step(self, prev: State) -> State:
        system = self.assemble_step_system(prev)
        phi, mu, theta, r, s = self.solve_step(system)
        return State(phi=phi, mu=mu, theta=theta, r=r, s=s,
                     t=prev.t + self.params.tau, n=prev.n + 1)

    # -- trajectory --------------------------------------------------------

    def run(self, phi0: np.ndarray, sinks=()) -> State:
        """Advance from t=0 to t_end; sinks are called as sink(prev, state).

        Every sink is also invoked once with (None, initial_state).
        """
        p = self.params
        ratio = p.t_end / p.tau
        n_steps = round(ratio)
        if n_steps < 1 or abs(ratio - n_steps) > 1e-12 * max(ratio, 1.0):
            n_steps = math.floor(ratio + 1e-12)
            warnings.warn(
                f"t_end={p.t_end} is not an integer multiple of tau={p.tau}; "
                f"finishing with a truncated step after {n_steps} full steps"
            )
        state = self.init_state(phi0)
        mass0 = self.combined_mass(state.phi)
        for sink in sinks:
            sink(None, state)
        for _ in range(n_steps):
            prev = state
            state = self.step(prev)
            if not np.all(np.isfinite(state.phi)):
                raise StepperError(f"NaN detected in phi at step {state.n}")
            drift = abs(self.combined_mass(state.phi) - mass0)
            if drift > MASS_RTOL * (1.0 + abs(mass0)):
                raise StepperError(
                    f"combined mass drift {drift!r} at step {state.n}"
                )
            for sink in sinks:
                sink(prev, state)
        if state.t < p.t_end - 1e-12 * p.t_end:
            # truncated final step to land exactly on t_end
            short = replace(p, tau=p.t_end - state.t)
            stepper = SavStepper(self.ops, short, self.dw_bulk, self.dw_bnd, self.solver)
            prev = state
            state = stepper.step(prev)
            for sink in sinks:
                sink(prev, state)
        return state
