"""Space-time error norms on nested meshes and experimental orders of convergence.

Errors between runs are measured in L2(0,T;L2) by prolonging the coarse
snapshots to the reference mesh (exact on the nested hierarchy), linearly
interpolating both trajectories in time, and applying a trapezoidal rule at
a fixed sampling step.  The same machinery serves the mesh, time-step, and
adsorption-rate limit studies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fem import FemOperators, assemble_operators
from .mesh import BoundaryMesh, BulkMesh, build_unit_square_mesh, prolong_unit_square, triangle_areas
from .potential import DoubleWell
from .scenarios import Scenario
from .stepper import SavStepper, State

DEFAULT_SAMPLE_DT = 2e-4

_mesh_cache: dict[int, tuple[BulkMesh, BoundaryMesh, FemOperators]] = {}


def unit_square_problem(level: int) -> tuple[BulkMesh, BoundaryMesh, FemOperators]:
    """Mesh and operators for a unit-square level, cached per process."""
    if level not in _mesh_cache:
        mesh, bnd = build_unit_square_mesh(level)
        _mesh_cache[level] = (mesh, bnd, assemble_operators(mesh, bnd))
    return _mesh_cache[level]


def double_wells(scenario: Scenario, ops: FemOperators) -> tuple[DoubleWell, DoubleWell]:
    """Potentials with shifts scaled by the mesh measures."""
    volume = float(np.sum(ops.ML_bulk))
    perimeter = float(np.sum(ops.ML_bnd))
    return (DoubleWell(scenario.shift_bulk / volume),
            DoubleWell(scenario.shift_bnd / perimeter))


@dataclass(frozen=True)
class Trajectory:
    """Uniform-cadence nodal snapshots of one run."""

    level: int
    tau: float
    times: np.ndarray
    phi: np.ndarray       # (n_snapshots, n_bulk)
    phi_bnd: np.ndarray   # (n_snapshots, n_bnd)


class SnapshotRecorder:
    """Run sink storing phi every `every` steps (plus the initial state)."""

    def __init__(self, trace: np.ndarray, every: int):
        self.trace = trace
        self.every = every
        self.times: list[float] = []
        self.phi: list[np.ndarray] = []

    def __call__(self, prev: State | None, state: State) -> None:
        if prev is not None and state.n % self.every != 0:
            return
        self.times.append(state.t)
        self.phi.append(state.phi.copy())

    def trajectory(self, level: int, tau: float) -> Trajectory:
        phi = np.array(self.phi)
        return Trajectory(level, tau, np.array(self.times), phi, phi[:, self.trace])


def simulate(scenario: Scenario, level: int,
             snapshot_dt: float = DEFAULT_SAMPLE_DT, sinks=()) -> Trajectory:
    """Run one scenario on a unit-square mesh and collect snapshots."""
    mesh, bnd, ops = unit_square_problem(level)
    dw_bulk, dw_bnd = double_wells(scenario, ops)
    params = scenario.params
    every = round(snapshot_dt / params.tau)
    if every < 1 or abs(every * params.tau - snapshot_dt) > 1e-12 * snapshot_dt:
        raise ValueError(
            f"snapshot step {snapshot_dt} is not an integer multiple of tau={params.tau}"
        )
    stepper = SavStepper(ops, params, dw_bulk, dw_bnd)
    phi0 = scenario.phi0(mesh.vertices[:, 0], mesh.vertices[:, 1])
    recorder = SnapshotRecorder(ops.trace, every)
    stepper.run(phi0, sinks=(recorder, *sinks))
    return recorder.trajectory(level, params.tau)


class _NormEvaluator:
    """Exact elementwise L2 norms on a fixed mesh, precomputed for reuse."""

    def __init__(self, mesh: BulkMesh, bnd: BoundaryMesh):
        self.triangles = mesh.triangles
        self.areas = triangle_areas(mesh.vertices, mesh.triangles)
        bulk_to_bnd = np.full(mesh.num_vertices, -1, dtype=np.int64)
        bulk_to_bnd[bnd.bnd_to_bulk] = np.arange(bnd.num_vertices)
        self.edge_idx = bulk_to_bnd[bnd.edges]
        d = mesh.vertices[bnd.edges[:, 1]] - mesh.vertices[bnd.edges[:, 0]]
        self.edge_lengths = np.hypot(d[:, 0], d[:, 1])

    def bulk_sq(self, nodal: np.ndarray) -> float:
        e = nodal[self.triangles]
        return float(np.sum((e.sum(axis=1) ** 2 + (e**2).sum(axis=1)) * self.areas) / 12.0)

    def bnd_sq(self, nodal_bnd: np.ndarray) -> float:
        a = nodal_bnd[self.edge_idx[:, 0]]
        b = nodal_bnd[self.edge_idx[:, 1]]
        return float(np.sum(self.edge_lengths * (a * a + a * b + b * b)) / 3.0)


def _prolong_to(traj: Trajectory, target_level: int) -> np.ndarray:
    """Prolong all bulk snapshots to the target unit-square level."""
    if target_level < traj.level:
        raise ValueError("reference level must be at least the coarse level")
    phi = traj.phi
    for lvl in range(traj.level, target_level):
        phi = np.array([prolong_unit_square(lvl, snap) for snap in phi])
    return phi


def _interp_in_time(times: np.ndarray, snapshots: np.ndarray, t: float) -> np.ndarray:
    """Piecewise-linear-in-time value of a snapshot stack at time t."""
    i = int(np.searchsorted(times, t, side="right")) - 1
    i = max(0, min(i, len(times) - 2))
    t0, t1 = times[i], times[i + 1]
    w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
    w = min(max(w, 0.0), 1.0)
    return (1.0 - w) * snapshots[i] + w * snapshots[i + 1]


def l2l2_error(coarse: Trajectory, ref: Trajectory,
               sample_dt: float = DEFAULT_SAMPLE_DT) -> tuple[float, float]:
    """L2(0,T;L2(Omega)) and L2(0,T;L2(Gamma)) distance between two runs."""
    t_end_c = coarse.times[-1]
    t_end_r = ref.times[-1]
    if abs(t_end_c - t_end_r) > 1e-10 * max(t_end_c, t_end_r):
        raise ValueError(f"trajectories cover different horizons: {t_end_c} vs {t_end_r}")
    mesh, bnd, _ = unit_square_problem(ref.level)
    norms = _NormEvaluator(mesh, bnd)
    coarse_fine = _prolong_to(coarse, ref.level)
    trace = bnd.bnd_to_bulk

    n_samples = round(t_end_r / sample_dt)
    sample_times = np.linspace(0.0, t_end_r, n_samples + 1)
    sq_bulk = np.empty(n_samples + 1)
    sq_bnd = np.empty(n_samples + 1)
    for k, t in enumerate(sample_times):
        diff = (_interp_in_time(coarse.times, coarse_fine, t)
                - _interp_in_time(ref.times, ref.phi, t))
        sq_bulk[k] = norms.bulk_sq(diff)
        sq_bnd[k] = norms.bnd_sq(diff[trace])
    err_bulk = math.sqrt(np.trapezoid(sq_bulk, sample_times))
    err_bnd = math.sqrt(np.trapezoid(sq_bnd, sample_times))
    return err_bulk, err_bnd


def compute_eoc(errors) -> np.ndarray:
    """Orders log(e_k/e_{k-1}) / log(p_k/p_{k-1}) for consecutive rows."""
    rows = list(errors)
    if len(rows) < 2:
        raise ValueError("need at least two (parameter, error) rows")
    params = np.array([p for p, _ in rows], dtype=float)
    errs = np.array([e for _, e in rows], dtype=float)
    if np.any(params <= 0) or np.any(errs <= 0):
        raise ValueError("parameters and errors must be positive")
    return np.log(errs[1:] / errs[:-1]) / np.log(params[1:] / params[:-1])


@dataclass(frozen=True)
class EocRow:
    parameter: float
    error_bulk: float
    error_bnd: float
    eoc_bulk: float | None
    eoc_bnd: float | None


@dataclass(frozen=True)
class EocReport:
    axis: str
    rows: tuple[EocRow, ...]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["axis", "parameter", "error_bulk", "error_bnd",
                             "eoc_bulk", "eoc_bnd"])
            for row in self.rows:
                writer.writerow([
                    self.axis,
                    repr(row.parameter),
                    repr(row.error_bulk),
                    repr(row.error_bnd),
                    "" if row.eoc_bulk is None else repr(row.eoc_bulk),
                    "" if row.eoc_bnd is None else repr(row.eoc_bnd),
                ])


def _report(axis: str, params, errors) -> EocReport:
    eoc_bulk = compute_eoc([(p, e[0]) for p, e in zip(params, errors)])
    eoc_bnd = compute_eoc([(p, e[1]) for p, e in zip(params, errors)])
    rows = [EocRow(params[0], errors[0][0], errors[0][1], None, None)]
    for k in range(1, len(params)):
        rows.append(EocRow(params[k], errors[k][0], errors[k][1],
                           float(eoc_bulk[k - 1]), float(eoc_bnd[k - 1])))
    return EocReport(axis, tuple(rows))


@dataclass(frozen=True)
class EocStudy:
    """Configuration of one convergence study.

    axis 'h': values are mesh levels, reference is the finest level.
    axis 'tau': values are time increments, reference the finest increment.
    axis 'xi': values are adsorption rates, reference run has xi = 0.
    axis 'xi_inverse': values are inverse rates, reference run has xi = inf.
    """

    scenario: Scenario
    axis: str
    values: tuple = ()
    reference: float | int | None = None
    level: int = 5
    tau: float = 2e-5
    t_end: float = 0.05
    sample_dt: float = DEFAULT_SAMPLE_DT
    param_overrides: dict = field(default_factory=dict)


def run_eoc_study(study: EocStudy) -> EocReport:
    """Execute all runs of a study and tabulate errors and orders."""
    base = replace(study.scenario.params, tau=study.tau, t_end=study.t_end,
                   **study.param_overrides)
    scenario = replace(study.scenario, params=base)

    if study.axis == "h":
        if study.reference is None:
            raise ValueError("h-study needs a reference level")
        ref = simulate(scenario, int(study.reference), study.sample_dt)
        errors = []
        for level in study.values:
            traj = simulate(scenario, int(level), study.sample_dt)
            errors.append(l2l2_error(traj, ref, study.sample_dt))
        params = [math.sqrt(2.0) * 2.0 ** (-int(lvl)) for lvl in study.values]
        return _report("h", params, errors)

    if study.axis == "tau":
        if study.reference is None:
            raise ValueError("tau-study needs a reference time increment")
        ref_scn = replace(scenario, params=replace(base, tau=float(study.reference)))
        ref = simulate(ref_scn, study.level, study.sample_dt)
        errors = []
        for tau in study.values:
            scn = replace(scenario, params=replace(base, tau=float(tau)))
            errors.append(l2l2_error(simulate(scn, study.level, study.sample_dt),
                                     ref, study.sample_dt))
        return _report("tau", list(study.values), errors)

    if study.axis in ("xi", "xi_inverse"):
        limit_xi = 0.0 if study.axis == "xi" else math.inf
        ref_scn = replace(scenario, params=replace(base, xi=limit_xi))
        ref = simulate(ref_scn, study.level, study.sample_dt)
        errors = []
        for value in study.values:
            xi = float(value) if study.axis == "xi" else 1.0 / float(value)
            scn = replace(scenario, params=replace(base, xi=xi))
            errors.append(l2l2_error(simulate(scn, study.level, study.sample_dt),
                                     ref, study.sample_dt))
        return _report(study.axis, list(study.values), errors)

    raise ValueError(f"unknown study axis {study.axis!r}")
