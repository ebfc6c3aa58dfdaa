"""Legacy ASCII VTK output for bulk and boundary fields."""

from __future__ import annotations

import os

import numpy as np

from .mesh import BoundaryMesh, BulkMesh
from .stepper import State


def _fmt(x: float) -> str:
    # 17 significant digits round-trip double precision exactly
    return format(float(x), ".17g")


def boundary_companion_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_boundary{ext or '.vtk'}"


def write_vtk(mesh: BulkMesh, bnd: BoundaryMesh, state: State, path: str) -> None:
    """Write phi and mu on the bulk mesh, plus a companion polyline file with
    the boundary trace of phi and theta."""
    nv = mesh.num_vertices
    nt = mesh.num_triangles
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"phase field at t={_fmt(state.t)}\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nv} double\n")
        for x, y in mesh.vertices:
            fh.write(f"{_fmt(x)} {_fmt(y)} 0\n")
        fh.write(f"CELLS {nt} {4 * nt}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"3 {i} {j} {k}\n")
        fh.write(f"CELL_TYPES {nt}\n")
        fh.write("5\n" * nt)
        fh.write(f"POINT_DATA {nv}\n")
        for name, data in (("phi", state.phi), ("mu", state.mu)):
            fh.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            for v in data:
                fh.write(_fmt(v) + "\n")

    nb = bnd.num_vertices
    ne = bnd.num_edges
    bulk_to_bnd = np.full(mesh.num_vertices, -1, dtype=np.int64)
    bulk_to_bnd[bnd.bnd_to_bulk] = np.arange(nb)
    with open(boundary_companion_path(path), "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"boundary fields at t={_fmt(state.t)}\n")
        fh.write("ASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {nb} double\n")
        for x, y in mesh.vertices[bnd.bnd_to_bulk]:
            fh.write(f"{_fmt(x)} {_fmt(y)} 0\n")
        fh.write(f"LINES {ne} {3 * ne}\n")
        for i, j in bulk_to_bnd[bnd.edges]:
            fh.write(f"2 {i} {j}\n")
        fh.write(f"POINT_DATA {nb}\n")
        for name, data in (("phi", state.phi[bnd.bnd_to_bulk]), ("theta", state.theta)):
            fh.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            for v in data:
                fh.write(_fmt(v) + "\n")
