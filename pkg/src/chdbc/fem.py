"""P1 finite element operators: stiffness matrices, lumped mass, trace map.

Mass lumping realizes the nodal interpolation of products everywhere a
mass-type integral appears, so all mass matrices are diagonal and stored as
plain vectors.  Assembly uses a deterministic coordinate list, making the
operators bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import BoundaryMesh, BulkMesh, triangle_areas


class AssemblyError(ValueError):
    """Raised for degenerate elements."""


@dataclass(frozen=True)
class FemOperators:
    """Assembled operators on a bulk/boundary mesh pair.

    K_bulk: bulk stiffness (grad-grad), symmetric CSR
    K_bnd: boundary stiffness (edgewise 1D Laplace-Beltrami), symmetric CSR
    ML_bulk / ML_bnd: diagonal lumped mass vectors (row sums of the
        consistent mass matrices, i.e. vertex patch area / 3 and edge star
        length / 2)
    trace: boundary-local -> bulk vertex index map
    trace_matrix: the same map as a sparse selection matrix T with
        (T phi)_j = phi[trace[j]]
    """

    K_bulk: sp.csr_matrix
    K_bnd: sp.csr_matrix
    ML_bulk: np.ndarray
    ML_bnd: np.ndarray
    trace: np.ndarray
    trace_matrix: sp.csr_matrix

    @property
    def n_bulk(self) -> int:
        return self.ML_bulk.shape[0]

    @property
    def n_bnd(self) -> int:
        return self.ML_bnd.shape[0]


def local_stiffness_triangle(v0, v1, v2) -> np.ndarray:
    """Element stiffness |K| grad(lambda_a).grad(lambda_b) for one triangle."""
    v0, v1, v2 = (np.asarray(v, dtype=float) for v in (v0, v1, v2))
    e = np.array([v2 - v1, v0 - v2, v1 - v0])
    area = 0.5 * (e[2][0] * (-e[1][1]) - e[2][1] * (-e[1][0]))
    if area <= 0:
        raise AssemblyError(f"triangle with non-positive area {area!r}")
    return (e @ e.T) / (4.0 * area)


def assemble_operators(mesh: BulkMesh, bnd: BoundaryMesh) -> FemOperators:
    """Assemble stiffness and lumped mass operators on both meshes."""
    nv = mesh.num_vertices
    tris = mesh.triangles
    p = mesh.vertices[tris]
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    if np.any(areas <= 0):
        raise AssemblyError("mesh contains inverted or degenerate triangles")

    # S_ab = (e_a . e_b) / (4 |K|), per element
    local = np.einsum("tad,tbd->tab", e, e) / (4.0 * areas)[:, None, None]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    K_bulk = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    K_bulk.sum_duplicates()

    ML_bulk = np.bincount(tris.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=nv)

    nb = bnd.num_vertices
    bulk_to_bnd = np.full(nv, -1, dtype=np.int64)
    bulk_to_bnd[bnd.bnd_to_bulk] = np.arange(nb)
    local_edges = bulk_to_bnd[bnd.edges]
    if np.any(local_edges < 0):
        raise AssemblyError("boundary edge endpoint missing from bnd_to_bulk")
    d = mesh.vertices[bnd.edges[:, 1]] - mesh.vertices[bnd.edges[:, 0]]
    lengths = np.hypot(d[:, 0], d[:, 1])
    if np.any(lengths <= 0):
        raise AssemblyError("degenerate boundary edge")

    inv = 1.0 / lengths
    i, j = local_edges[:, 0], local_edges[:, 1]
    rows_b = np.concatenate([i, i, j, j])
    cols_b = np.concatenate([i, j, i, j])
    vals_b = np.concatenate([inv, -inv, -inv, inv])
    K_bnd = sp.coo_matrix((vals_b, (rows_b, cols_b)), shape=(nb, nb)).tocsr()
    K_bnd.sum_duplicates()

    ML_bnd = np.bincount(local_edges.ravel(), weights=np.repeat(lengths / 2.0, 2), minlength=nb)

    T = sp.csr_matrix(
        (np.ones(nb), (np.arange(nb), bnd.bnd_to_bulk)), shape=(nb, nv)
    )
    return FemOperators(K_bulk, K_bnd, ML_bulk, ML_bnd, bnd.bnd_to_bulk.copy(), T)


def lumped_integral_bulk(ops: FemOperators, nodal: np.ndarray) -> float:
    """Lumped integral of the P1 function with the given bulk nodal values."""
    if nodal.shape != (ops.n_bulk,):
        raise ValueError(f"expected nodal vector of length {ops.n_bulk}, got {nodal.shape}")
    return float(np.sum(ops.ML_bulk * nodal))

def lumped_integral_bnd(ops: FemOperators, nodal: np.ndarray) -> float:
    """Lumped integral over the boundary."""
    if nodal.shape != (ops.n_bnd,):
        raise ValueError(f"expected nodal vector of length {ops.n_bnd}, got {nodal.shape}")
    return float(np.sum(ops.ML_bnd * nodal))


def l2_norm_bulk(mesh: BulkMesh, nodal: np.ndarray) -> float:
    """Exact L2(Omega) norm of a P1 function (consistent-mass quadrature)."""
    e = nodal[mesh.triangles]
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    sq = (e.sum(axis=1) ** 2 + (e**2).sum(axis=1)) * areas / 12.0
    return float(np.sqrt(np.sum(sq)))


def l2_norm_bnd(vertices: np.ndarray, bnd: BoundaryMesh, nodal_bnd: np.ndarray) -> float:
    """Exact L2(Gamma) norm of a boundary P1 function from boundary-local values."""
    bulk_to_bnd = {int(v): k for k, v in enumerate(bnd.bnd_to_bulk)}
    idx = np.array([[bulk_to_bnd[int(i)], bulk_to_bnd[int(j)]] for i, j in bnd.edges])
    a = nodal_bnd[idx[:, 0]]
    b = nodal_bnd[idx[:, 1]]
    d = vertices[bnd.edges[:, 1]] - vertices[bnd.edges[:, 0]]
    lengths = np.hypot(d[:, 0], d[:, 1])
    return float(np.sqrt(np.sum(lengths * (a * a + a * b + b * b) / 3.0)))
