import numpy as np
import pytest

from chdbc.mesh import (
    BoundaryMesh,
    BulkMesh,
    MeshError,
    build_unit_square_mesh,
    evaluate_unit_square,
    load_mesh,
    prolong_unit_square,
    triangle_areas,
    validate,
)


@pytest.mark.parametrize("level", [1, 2, 3, 5])
def test_unit_square_counts(level):
    mesh, bnd = build_unit_square_mesh(level)
    n = 2**level
    assert mesh.num_vertices == (n + 1) ** 2
    assert mesh.num_triangles == 2 * n * n
    assert bnd.num_edges == 4 * n
    assert bnd.num_vertices == 4 * n
    assert mesh.h == pytest.approx(np.sqrt(2.0) / n, rel=1e-15)


def test_unit_square_geometry():
    mesh, bnd = build_unit_square_mesh(3)
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    assert np.all(areas > 0)
    assert np.sum(areas) == pytest.approx(1.0, abs=1e-14)
    d = mesh.vertices[bnd.edges[:, 1]] - mesh.vertices[bnd.edges[:, 0]]
    assert np.sum(np.hypot(d[:, 0], d[:, 1])) == pytest.approx(4.0, abs=1e-13)
    # closed loop: each edge starts where the previous one ended
    assert np.array_equal(bnd.edges[1:, 0], bnd.edges[:-1, 1])
    assert bnd.edges[0, 0] == bnd.edges[-1, 1]


def test_unit_square_validates_clean():
    mesh, bnd = build_unit_square_mesh(3)
    report = validate(mesh, bnd)
    assert report.ok
    assert not report.warnings
    # right isosceles triangles: diameter over inscribed-circle diameter
    assert report.quasiuniformity_ratio == pytest.approx(1.0 + np.sqrt(2.0), rel=1e-12)


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        build_unit_square_mesh(0)


def test_prolongation_exact_for_linears():
    level = 3
    mesh_c, _ = build_unit_square_mesh(level)
    mesh_f, _ = build_unit_square_mesh(level + 1)
    coarse = 2.0 * mesh_c.vertices[:, 0] + 3.0 * mesh_c.vertices[:, 1] - 1.0
    fine = 2.0 * mesh_f.vertices[:, 0] + 3.0 * mesh_f.vertices[:, 1] - 1.0
    assert np.allclose(prolong_unit_square(level, coarse), fine, atol=1e-14)


def test_prolongation_exact_for_arbitrary_p1():
    # nestedness: any coarse P1 function is reproduced exactly at fine nodes
    rng = np.random.default_rng(7)
    level = 2
    mesh_f, _ = build_unit_square_mesh(level + 1)
    coarse = rng.standard_normal((2**level + 1) ** 2)
    fine = prolong_unit_square(level, coarse)
    expected = evaluate_unit_square(level, coarse, mesh_f.vertices)
    assert np.allclose(fine, expected, atol=1e-13)


def test_prolongation_shape_check():
    with pytest.raises(ValueError):
        prolong_unit_square(3, np.zeros(10))


def test_point_evaluation_linear():
    rng = np.random.default_rng(3)
    mesh, _ = build_unit_square_mesh(2)
    nodal = 0.5 * mesh.vertices[:, 0] - 1.5 * mesh.vertices[:, 1] + 0.25
    pts = rng.random((40, 2))
    vals = evaluate_unit_square(2, nodal, pts)
    assert np.allclose(vals, 0.5 * pts[:, 0] - 1.5 * pts[:, 1] + 0.25, atol=1e-13)


def _write_mesh_file(path, vertices, triangles, edges):
    with open(path, "w") as fh:
        fh.write(f"{len(vertices)} {len(triangles)} {len(edges)}  # header\n")
        for x, y in vertices:
            fh.write(f"{x} {y}\n")
        for tri in triangles:
            fh.write(" ".join(str(int(v)) for v in tri) + "\n")
        for i, j in edges:
            fh.write(f"{int(i)} {int(j)}\n")


def test_load_mesh_roundtrip(tmp_path):
    mesh, bnd = build_unit_square_mesh(2)
    path = tmp_path / "square.txt"
    _write_mesh_file(path, mesh.vertices, mesh.triangles, bnd.edges)
    loaded, loaded_bnd = load_mesh(path)
    assert np.allclose(loaded.vertices, mesh.vertices)
    assert np.array_equal(loaded.triangles, mesh.triangles)
    assert loaded.h == pytest.approx(mesh.h, rel=1e-14)
    assert {tuple(sorted(e)) for e in loaded_bnd.edges.tolist()} == {
        tuple(sorted(e)) for e in bnd.edges.tolist()
    }
    assert validate(loaded, loaded_bnd).ok


def test_load_mesh_reorients_clockwise(tmp_path):
    mesh, bnd = build_unit_square_mesh(1)
    triangles = mesh.triangles.copy()
    triangles[0] = triangles[0][::-1]
    path = tmp_path / "flipped.txt"
    _write_mesh_file(path, mesh.vertices, triangles, bnd.edges)
    with pytest.warns(UserWarning, match="reoriented"):
        loaded, _ = load_mesh(path)
    assert np.all(triangle_areas(loaded.vertices, loaded.triangles) > 0)


def test_load_mesh_rejects_bad_input(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a mesh\n")
    with pytest.raises(MeshError):
        load_mesh(path)

    path.write_text("3 1 0\n0 0\n1 0\n")  # truncated vertex block
    with pytest.raises(MeshError, match="expected"):
        load_mesh(path)


def test_load_mesh_rejects_wrong_boundary(tmp_path):
    mesh, bnd = build_unit_square_mesh(1)
    edges = bnd.edges.copy()
    edges[0] = [0, 4]  # interior diagonal declared as boundary
    path = tmp_path / "wrongbnd.txt"
    _write_mesh_file(path, mesh.vertices, mesh.triangles, edges)
    with pytest.raises(MeshError, match="boundary"):
        load_mesh(path)


def test_validate_detects_broken_meshes():
    mesh, bnd = build_unit_square_mesh(2)

    bad_h = BulkMesh(mesh.vertices, mesh.triangles, mesh.h * 2)
    assert not validate(bad_h, bnd).ok

    tris = mesh.triangles.copy()
    tris[0] = tris[0][::-1]
    assert not validate(BulkMesh(mesh.vertices, tris, mesh.h), bnd).ok

    extra = np.vstack([mesh.vertices, [[0.5, 0.5]]])  # duplicate, unused
    dangling = BulkMesh(extra, mesh.triangles, mesh.h)
    assert not validate(dangling, bnd).ok


def test_validate_detects_broken_boundary():
    mesh, bnd = build_unit_square_mesh(2)
    edges = bnd.edges.copy()
    edges = edges[:-1]  # drop one edge: no longer closes
    broken = BoundaryMesh(edges, bnd.bnd_to_bulk)
    assert not validate(mesh, broken).ok
