"""Command-line interface: run, eoc, validate, paper-tables."""

from __future__ import annotations

import os

# thread count is the only environment knob; must be set before the numeric
# libraries initialize their thread pools
_threads = os.environ.get("CHDBC_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import charts, reference_tables
from .config import Config, ConfigError, load_config, parse_xi
from .diagnostics import DiagnosticsRecorder, write_diagnostics_csv
from .eoc import EocStudy, run_eoc_study, double_wells, unit_square_problem
from .fem import assemble_operators
from .mesh import load_mesh
from .scenarios import Scenario, get_scenario
from .stepper import Params, SavStepper
from .validation import run_validation
from .vtkio import write_vtk


class VtkSnapshotSink:
    def __init__(self, mesh, bnd, outdir, every):
        self.mesh = mesh
        self.bnd = bnd
        self.outdir = outdir
        self.every = every

    def __call__(self, prev, state):
        if self.every <= 0 or state.n % self.every != 0:
            return
        path = os.path.join(self.outdir, f"state_{state.n:08d}.vtk")
        write_vtk(self.mesh, self.bnd, state, path)


def _build_scenario(cfg: Config) -> Scenario:
    if cfg.scenario == "custom":
        if cfg.phi0_constant is None:
            raise ConfigError("custom scenario needs [initial] constant = <value>")
        value = cfg.phi0_constant

        def phi0(x, y):
            return np.full_like(np.asarray(x, dtype=float), value)

        scenario = Scenario(name="custom", phi0=phi0,
                            shift_bulk=0.01, shift_bnd=0.01, params=cfg.params)
    else:
        scenario = get_scenario(cfg.scenario)
    scenario = replace(scenario, params=cfg.params)
    if cfg.shift_bulk is not None:
        scenario = replace(scenario, shift_bulk=cfg.shift_bulk)
    if cfg.shift_bnd is not None:
        scenario = replace(scenario, shift_bnd=cfg.shift_bnd)
    return scenario


def _build_problem(cfg: Config):
    if cfg.mesh_path is not None:
        mesh, bnd = load_mesh(cfg.mesh_path)
        return mesh, bnd, assemble_operators(mesh, bnd)
    if cfg.mesh_level is None:
        raise ConfigError("config needs either mesh.level or mesh.path")
    return unit_square_problem(cfg.mesh_level)


def _apply_run_overrides(cfg: Config, args) -> Config:
    params = cfg.params
    if args.xi is not None:
        params = replace(params, xi=parse_xi(args.xi))
    if args.tau is not None:
        params = replace(params, tau=args.tau)
    if args.t_end is not None:
        params = replace(params, t_end=args.t_end)
    cfg = replace(cfg, params=params)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    if args.snapshot_every is not None:
        cfg = replace(cfg, snapshot_every=args.snapshot_every)
    return cfg


def cmd_run(args) -> int:
    cfg = _apply_run_overrides(load_config(args.config), args)
    scenario = _build_scenario(cfg)
    mesh, bnd, ops = _build_problem(cfg)
    params = scenario.params
    if mesh.h**4 / params.tau > 1.0:
        print(f"warning: h^4/tau = {mesh.h**4 / params.tau:.3g} > 1; "
              "refine the time step for the accuracy theory to apply",
              file=sys.stderr)

    os.makedirs(cfg.output_dir, exist_ok=True)
    dw_bulk, dw_bnd = double_wells(scenario, ops)
    stepper = SavStepper(ops, params, dw_bulk, dw_bnd, solver=cfg.solver)
    phi0 = scenario.phi0(mesh.vertices[:, 0], mesh.vertices[:, 1])

    recorder = DiagnosticsRecorder(ops, params, dw_bulk, dw_bnd,
                                   every=cfg.diagnostics_every)
    sinks = [recorder]
    if cfg.snapshot_every > 0:
        sinks.append(VtkSnapshotSink(mesh, bnd, cfg.output_dir, cfg.snapshot_every))
    final = stepper.run(phi0, sinks=sinks)

    csv_path = os.path.join(cfg.output_dir, "diagnostics.csv")
    write_diagnostics_csv(recorder.rows, csv_path)
    if cfg.svg:
        charts.write_energy_chart(recorder.rows,
                                  os.path.join(cfg.output_dir, "energy.svg"))
    if cfg.snapshot_every > 0:
        write_vtk(mesh, bnd, final, os.path.join(cfg.output_dir, "state_final.vtk"))
    print(f"completed {final.n} steps to t={final.t:.6g}; "
          f"diagnostics in {csv_path}")
    return 0


_FULL_SCALE = {
    # full-scale study settings matching the published experiments
    "h": dict(values=(7, 6), reference=8, tau=2e-5, t_end=1.0),
    "tau": dict(values=(2e-5, 4e-5), reference=1e-5, level=7, t_end=1.0),
    "xi": dict(level=8, tau=3e-5, t_end=2.5),
    "xi_inverse": dict(level=8, tau=3e-5, t_end=2.5),
}


def cmd_eoc(args) -> int:
    cfg = load_config(args.config)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    scenario = _build_scenario(cfg)
    e = cfg.eoc
    axis = (args.axis or e.axis).replace("-", "_")

    if axis == "h":
        values = tuple(args.levels) if args.levels else e.levels
        reference = e.reference_level
        level, tau = e.level, args.tau or e.tau
    elif axis == "tau":
        values = e.taus
        reference = e.reference_tau
        level, tau = e.level, e.tau
    elif axis in ("xi", "xi_inverse"):
        values = e.xis
        reference = None
        level, tau = e.level, args.tau or e.tau
    else:
        print(f"error: unknown axis {axis!r}", file=sys.stderr)
        return 2
    t_end = args.t_end or e.t_end

    if args.full:
        full = _FULL_SCALE[axis]
        values = full.get("values", values)
        reference = full.get("reference", reference)
        level = full.get("level", level)
        tau = full.get("tau", tau)
        t_end = full.get("t_end", t_end)
        print("running the full-scale study; expect multi-hour runtime",
              file=sys.stderr)

    study = EocStudy(scenario=scenario, axis=axis, values=tuple(values),
                     reference=reference, level=level, tau=tau, t_end=t_end,
                     sample_dt=e.sample_dt)
    report = run_eoc_study(study)
    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, f"eoc_{axis}.csv")
    report.write_csv(csv_path)
    print(f"{'parameter':>12} {'error_bulk':>12} {'eoc_bulk':>9} "
          f"{'error_bnd':>12} {'eoc_bnd':>9}")
    for row in report.rows:
        eb = "-" if row.eoc_bulk is None else f"{row.eoc_bulk:.2f}"
        eg = "-" if row.eoc_bnd is None else f"{row.eoc_bnd:.2f}"
        print(f"{row.parameter:>12.6g} {row.error_bulk:>12.4e} {eb:>9} "
              f"{row.error_bnd:>12.4e} {eg:>9}")
    print(f"report written to {csv_path}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    scenario = _build_scenario(cfg)
    level = cfg.mesh_level if cfg.mesh_level is not None else 4
    results = run_validation(scenario, level, n_steps=args.steps,
                             xis=(0.0, 1.0, math.inf))
    for result in results:
        print(result)
    return 0 if all(r.passed for r in results) else 1


def cmd_paper_tables(args) -> int:
    print(reference_tables.format_tables())
    return 0


def _add_config_arg(sub_parser) -> None:
    sub_parser.add_argument("config", nargs="?", default=None)
    sub_parser.add_argument("--config", dest="config_flag", default=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chdbc",
        description="SAV finite element solver for Cahn-Hilliard equations "
                    "with dynamic boundary conditions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate and write diagnostics + snapshots")
    _add_config_arg(p_run)
    p_run.add_argument("--output-dir")
    p_run.add_argument("--xi", help="adsorption rate; accepts 'inf'")
    p_run.add_argument("--tau", type=float)
    p_run.add_argument("--t-end", type=float)
    p_run.add_argument("--snapshot-every", type=int)
    p_run.set_defaults(func=cmd_run)

    p_eoc = sub.add_parser("eoc", help="run a convergence study")
    _add_config_arg(p_eoc)
    p_eoc.add_argument("--output-dir")
    p_eoc.add_argument("--axis", choices=["h", "tau", "xi", "xi-inverse", "xi_inverse"])
    p_eoc.add_argument("--levels", type=int, nargs="+")
    p_eoc.add_argument("--tau", type=float)
    p_eoc.add_argument("--t-end", type=float)
    p_eoc.add_argument("--full", action="store_true",
                       help="published full-scale settings (multi-hour)")
    p_eoc.set_defaults(func=cmd_eoc)

    p_val = sub.add_parser("validate", help="run the invariant suite")
    _add_config_arg(p_val)
    p_val.add_argument("--steps", type=int, default=200)
    p_val.set_defaults(func=cmd_validate)

    p_tab = sub.add_parser("paper-tables",
                           help="recompute published convergence-order columns")
    p_tab.set_defaults(func=cmd_paper_tables)

    args = parser.parse_args(argv)
    if hasattr(args, "config_flag"):
        if args.config is None:
            args.config = args.config_flag
        if args.config is None:
            parser.error(f"{args.command}: a config file is required "
                         "(positional or --config)")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
