import numpy as np
import pytest

from chdbc.fem import (
    AssemblyError,
    assemble_operators,
    l2_norm_bnd,
    l2_norm_bulk,
    local_stiffness_triangle,
    lumped_integral_bnd,
    lumped_integral_bulk,
)
from chdbc.mesh import build_unit_square_mesh


@pytest.fixture(scope="module")
def problem():
    mesh, bnd = build_unit_square_mesh(4)
    return mesh, bnd, assemble_operators(mesh, bnd)


def test_local_stiffness_reference_triangle():
    # unit right triangle: hand-computed gradients of the barycentric basis
    S = local_stiffness_triangle((0, 0), (1, 0), (0, 1))
    expected = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    assert np.allclose(S, expected, atol=1e-14)


def test_local_stiffness_rejects_degenerate():
    with pytest.raises(AssemblyError):
        local_stiffness_triangle((0, 0), (1, 0), (2, 0))
    with pytest.raises(AssemblyError):
        local_stiffness_triangle((0, 0), (0, 1), (1, 0))  # clockwise


def test_stiffness_symmetry_and_kernel(problem):
    _, _, ops = problem
    assert abs(ops.K_bulk - ops.K_bulk.T).max() < 1e-14
    assert abs(ops.K_bnd - ops.K_bnd.T).max() < 1e-14
    ones = np.ones(ops.n_bulk)
    assert np.max(np.abs(ops.K_bulk @ ones)) < 1e-13
    assert np.max(np.abs(ops.K_bnd @ np.ones(ops.n_bnd))) < 1e-13


def test_lumped_masses_sum_to_measures(problem):
    _, _, ops = problem
    assert np.sum(ops.ML_bulk) == pytest.approx(1.0, abs=1e-13)
    assert np.sum(ops.ML_bnd) == pytest.approx(4.0, abs=1e-13)
    assert np.all(ops.ML_bulk > 0)
    assert np.all(ops.ML_bnd > 0)


def test_p1_dirichlet_energy_exact(problem):
    mesh, _, ops = problem
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    assert x @ (ops.K_bulk @ x) == pytest.approx(1.0, rel=1e-13)
    assert y @ (ops.K_bulk @ y) == pytest.approx(1.0, rel=1e-13)
    f = x + 2.0 * y
    assert f @ (ops.K_bulk @ f) == pytest.approx(5.0, rel=1e-13)


def test_boundary_dirichlet_energy_exact(problem):
    mesh, _, ops = problem
    # trace of f(x, y) = x has unit tangential slope on top and bottom only
    g = mesh.vertices[ops.trace, 0]
    assert g @ (ops.K_bnd @ g) == pytest.approx(2.0, rel=1e-13)


def test_trace_matrix_selects(problem):
    _, _, ops = problem
    rng = np.random.default_rng(11)
    phi = rng.standard_normal(ops.n_bulk)
    assert np.array_equal(ops.trace_matrix @ phi, phi[ops.trace])


def test_lumped_integrals(problem):
    _, _, ops = problem
    assert lumped_integral_bulk(ops, np.ones(ops.n_bulk)) == pytest.approx(1.0, abs=1e-13)
    assert lumped_integral_bnd(ops, np.ones(ops.n_bnd)) == pytest.approx(4.0, abs=1e-13)
    with pytest.raises(ValueError):
        lumped_integral_bulk(ops, np.ones(3))
    with pytest.raises(ValueError):
        lumped_integral_bnd(ops, np.ones(3))


def test_exact_l2_norms(problem):
    mesh, bnd, ops = problem
    nv = mesh.num_vertices
    assert l2_norm_bulk(mesh, np.ones(nv)) == pytest.approx(1.0, rel=1e-13)
    # int_0^1 x^2 dx = 1/3, and x is in the P1 space so the norm is exact
    x = mesh.vertices[:, 0]
    assert l2_norm_bulk(mesh, x) == pytest.approx(1.0 / np.sqrt(3.0), rel=1e-13)
    ones_bnd = np.ones(bnd.num_vertices)
    assert l2_norm_bnd(mesh.vertices, bnd, ones_bnd) == pytest.approx(2.0, rel=1e-13)


def test_boundary_stiffness_annulus_of_edges(problem):
    # each boundary vertex row has exactly its two edge neighbours
    _, _, ops = problem
    K = ops.K_bnd.tocsr()
    nnz_per_row = np.diff(K.indptr)
    assert np.all(nnz_per_row == 3)
