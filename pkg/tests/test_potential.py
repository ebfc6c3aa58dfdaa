import numpy as np
import pytest

from chdbc.fem import assemble_operators
from chdbc.mesh import build_unit_square_mesh
from chdbc.potential import (
    DoubleWell,
    EnergyFloorError,
    discrete_energy_bnd,
    discrete_energy_bulk,
    nodal_force_bnd,
    nodal_force_bulk,
    sav_radius,
)


@pytest.fixture(scope="module")
def ops():
    mesh, bnd = build_unit_square_mesh(3)
    return assemble_operators(mesh, bnd)


def test_shift_must_be_positive():
    with pytest.raises(ValueError):
        DoubleWell(0.0)
    with pytest.raises(ValueError):
        DoubleWell(-1.0)


def test_well_minima_and_critical_points():
    dw = DoubleWell(0.01)
    assert dw.value(1.0) == pytest.approx(0.01, abs=1e-15)
    assert dw.value(-1.0) == pytest.approx(0.01, abs=1e-15)
    assert dw.value(0.0) == pytest.approx(0.26, abs=1e-15)
    for x in (-1.0, 0.0, 1.0):
        assert dw.derivative(x) == pytest.approx(0.0, abs=1e-15)


def test_derivative_finite_difference():
    dw = DoubleWell(0.03)
    rng = np.random.default_rng(5)
    xs = rng.uniform(-2.0, 2.0, size=64)
    h = 1e-6
    fd = (dw.value(xs + h) - dw.value(xs - h)) / (2.0 * h)
    assert np.allclose(fd, dw.derivative(xs), atol=5e-9)


def test_discrete_energies_and_floor(ops):
    dw = DoubleWell(0.01)
    rng = np.random.default_rng(9)
    phi = rng.uniform(-1.5, 1.5, ops.n_bulk)
    e_bulk = discrete_energy_bulk(ops, dw, phi)
    e_bnd = discrete_energy_bnd(ops, dw, phi[ops.trace])
    assert e_bulk >= dw.shift * np.sum(ops.ML_bulk) - 1e-15
    assert e_bnd >= dw.shift * np.sum(ops.ML_bnd) - 1e-15


def test_nodal_forces_differentiate_energy(ops):
    # b(phi).psi is the directional derivative of the lumped energy
    dw = DoubleWell(0.02)
    rng = np.random.default_rng(17)
    phi = rng.uniform(-1.2, 1.2, ops.n_bulk)
    psi = rng.standard_normal(ops.n_bulk)
    h = 1e-6
    fd = (discrete_energy_bulk(ops, dw, phi + h * psi)
          - discrete_energy_bulk(ops, dw, phi - h * psi)) / (2.0 * h)
    assert fd == pytest.approx(float(nodal_force_bulk(ops, dw, phi) @ psi), abs=1e-7)

    phi_bnd = phi[ops.trace]
    psi_bnd = psi[ops.trace]
    fd_bnd = (discrete_energy_bnd(ops, dw, phi_bnd + h * psi_bnd)
              - discrete_energy_bnd(ops, dw, phi_bnd - h * psi_bnd)) / (2.0 * h)
    assert fd_bnd == pytest.approx(float(nodal_force_bnd(ops, dw, phi_bnd) @ psi_bnd), abs=1e-7)


def test_clipping_never_increases_energy(ops):
    dw = DoubleWell(0.01)
    rng = np.random.default_rng(23)
    for _ in range(20):
        phi = rng.uniform(-3.0, 3.0, ops.n_bulk)
        clipped = np.clip(phi, -1.0, 1.0)
        assert (discrete_energy_bulk(ops, dw, clipped)
                <= discrete_energy_bulk(ops, dw, phi) + 1e-14)


def test_sav_radius():
    assert sav_radius(4.0) == pytest.approx(2.0, rel=1e-15)
    assert sav_radius(2.5, floor=1.0) == pytest.approx(np.sqrt(2.5), rel=1e-15)
    with pytest.raises(EnergyFloorError):
        sav_radius(0.0)
    with pytest.raises(EnergyFloorError):
        sav_radius(0.5, floor=1.0)
