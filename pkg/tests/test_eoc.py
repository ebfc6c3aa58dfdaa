import csv
import math

import numpy as np
import pytest

from chdbc.eoc import (
    EocReport,
    EocRow,
    EocStudy,
    Trajectory,
    _interp_in_time,
    compute_eoc,
    l2l2_error,
    run_eoc_study,
    simulate,
    unit_square_problem,
)
from chdbc.scenarios import scenario_separation, with_params


def test_compute_eoc_recovers_power_law():
    hs = [0.4, 0.2, 0.1, 0.05]
    errors = [(h, 3.7 * h**2.5) for h in hs]
    eoc = compute_eoc(errors)
    assert np.allclose(eoc, 2.5, atol=1e-12)


def test_compute_eoc_input_validation():
    with pytest.raises(ValueError):
        compute_eoc([(0.1, 1.0)])
    with pytest.raises(ValueError):
        compute_eoc([(0.1, 1.0), (0.05, -1.0)])
    with pytest.raises(ValueError):
        compute_eoc([(0.0, 1.0), (0.05, 0.5)])


def test_interp_in_time_linear():
    times = np.array([0.0, 1.0, 2.0])
    snaps = np.array([[0.0, 0.0], [2.0, 4.0], [4.0, 8.0]])
    assert np.allclose(_interp_in_time(times, snaps, 0.5), [1.0, 2.0])
    assert np.allclose(_interp_in_time(times, snaps, 1.75), [3.5, 7.0])
    # clamped outside the range
    assert np.allclose(_interp_in_time(times, snaps, -1.0), [0.0, 0.0])
    assert np.allclose(_interp_in_time(times, snaps, 3.0), [4.0, 8.0])


def _constant_trajectory(level, value, t_end, n_snaps):
    mesh, bnd, _ = unit_square_problem(level)
    times = np.linspace(0.0, t_end, n_snaps + 1)
    phi = np.full((n_snaps + 1, mesh.num_vertices), value)
    return Trajectory(level, t_end / n_snaps, times, phi, phi[:, bnd.bnd_to_bulk])


def test_l2l2_error_of_constant_difference():
    # |c| * sqrt(T) in the bulk and |c| * 2 sqrt(T) on the boundary
    t_end = 0.5
    a = _constant_trajectory(2, 1.5, t_end, 5)
    b = _constant_trajectory(2, 0.0, t_end, 5)
    err_bulk, err_bnd = l2l2_error(a, b, sample_dt=0.1)
    assert err_bulk == pytest.approx(1.5 * math.sqrt(t_end), rel=1e-12)
    assert err_bnd == pytest.approx(1.5 * 2.0 * math.sqrt(t_end), rel=1e-12)


def test_l2l2_error_zero_for_identical_runs():
    a = _constant_trajectory(2, 0.7, 0.2, 4)
    assert l2l2_error(a, a, sample_dt=0.05) == (0.0, 0.0)


def test_l2l2_error_across_levels():
    # a P1 function lives exactly on both meshes, so the distance to a
    # shifted copy is the L2 norm of the constant shift
    coarse = _constant_trajectory(2, 1.0, 0.2, 4)
    fine = _constant_trajectory(3, 0.0, 0.2, 4)
    err_bulk, err_bnd = l2l2_error(coarse, fine, sample_dt=0.05)
    assert err_bulk == pytest.approx(math.sqrt(0.2), rel=1e-12)
    assert err_bnd == pytest.approx(2.0 * math.sqrt(0.2), rel=1e-12)


def test_l2l2_error_horizon_mismatch():
    a = _constant_trajectory(2, 1.0, 0.2, 4)
    b = _constant_trajectory(2, 1.0, 0.4, 4)
    with pytest.raises(ValueError, match="different horizons"):
        l2l2_error(a, b)


def test_simulate_snapshot_cadence():
    scenario = with_params(scenario_separation(), tau=1e-4, t_end=1e-3)
    traj = simulate(scenario, 3, snapshot_dt=2e-4)
    assert len(traj.times) == 6
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ValueError, match="integer multiple"):
        simulate(scenario, 3, snapshot_dt=2.5e-4)


def test_eoc_report_csv_roundtrip(tmp_path):
    report = EocReport("h", (
        EocRow(0.2, 1e-2, 2e-2, None, None),
        EocRow(0.1, 2.5e-3, 1e-2, 2.0, 1.0),
    ))
    path = tmp_path / "eoc.csv"
    report.write_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["axis"] == "h"
    assert rows[0]["eoc_bulk"] == ""
    assert float(rows[1]["eoc_bulk"]) == 2.0
    assert float(rows[1]["error_bnd"]) == 1e-2


def test_run_eoc_study_h_axis_smoke():
    # tiny horizon: exercises the full pipeline, not the convergence rates
    scenario = scenario_separation()
    study = EocStudy(scenario=scenario, axis="h", values=(2, 3), reference=4,
                     tau=2e-4, t_end=2e-3, sample_dt=4e-4)
    report = run_eoc_study(study)
    assert len(report.rows) == 2
    assert report.rows[0].eoc_bulk is None
    assert report.rows[1].eoc_bulk is not None
    assert report.rows[0].error_bulk > 0


def test_run_eoc_study_unknown_axis():
    with pytest.raises(ValueError, match="axis"):
        run_eoc_study(EocStudy(scenario=scenario_separation(), axis="nope"))
    with pytest.raises(ValueError, match="reference"):
        run_eoc_study(EocStudy(scenario=scenario_separation(), axis="h",
                               values=(2, 3)))
