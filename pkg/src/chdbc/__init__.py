"""Energy-stable SAV finite element solver for Cahn-Hilliard equations with
Cahn-Hilliard-type dynamic boundary conditions on 2D polygonal domains."""

from .config import Config, ConfigError, load_config, parse_xi, save_config
from .diagnostics import (
    DiagnosticsRecorder,
    DiagnosticsRow,
    diagnostics_row,
    energy_identity_residual,
    masses,
    modified_energy,
    original_energy,
    write_diagnostics_csv,
)
from .eoc import (
    EocReport,
    EocRow,
    EocStudy,
    Trajectory,
    compute_eoc,
    l2l2_error,
    run_eoc_study,
    simulate,
    unit_square_problem,
)
from .fem import AssemblyError, FemOperators, assemble_operators
from .mesh import (
    BoundaryMesh,
    BulkMesh,
    MeshError,
    ValidationReport,
    build_unit_square_mesh,
    load_mesh,
    prolong_unit_square,
    validate,
)
from .potential import DoubleWell, EnergyFloorError
from .scenarios import Scenario, get_scenario, scenario_adsorption, scenario_separation, with_params
from .stepper import Params, SavStepper, State, StepperError
from .validation import CheckResult, run_validation
from .vtkio import write_vtk

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BoundaryMesh",
    "BulkMesh",
    "CheckResult",
    "Config",
    "ConfigError",
    "DiagnosticsRecorder",
    "DiagnosticsRow",
    "DoubleWell",
    "EnergyFloorError",
    "EocReport",
    "EocRow",
    "EocStudy",
    "FemOperators",
    "MeshError",
    "Params",
    "SavStepper",
    "Scenario",
    "State",
    "StepperError",
    "Trajectory",
    "ValidationReport",
    "assemble_operators",
    "build_unit_square_mesh",
    "compute_eoc",
    "diagnostics_row",
    "energy_identity_residual",
    "get_scenario",
    "l2l2_error",
    "load_config",
    "load_mesh",
    "masses",
    "modified_energy",
    "original_energy",
    "parse_xi",
    "prolong_unit_square",
    "run_eoc_study",
    "run_validation",
    "save_config",
    "scenario_adsorption",
    "scenario_separation",
    "simulate",
    "unit_square_problem",
    "validate",
    "with_params",
    "write_diagnostics_csv",
    "write_vtk",
]
