"""Triangulations of polygonal 2D domains with boundary partitions.

The bulk mesh is a conforming P1 triangulation; the boundary mesh is the
induced partition of the domain boundary into edges, ordered into closed
loops.  Structured unit-square meshes are built hierarchically (all squares
split along the same diagonal) so that consecutive refinement levels are
nested.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

QUASIUNIFORMITY_BOUND = 10.0


class MeshError(ValueError):
    """Raised for unusable mesh input (parse errors, broken connectivity)."""


@dataclass(frozen=True)
class BulkMesh:
    """Conforming triangulation of a polygonal domain.

    vertices: (nv, 2) coordinates
    triangles: (nt, 3) vertex indices, counter-clockwise
    h: maximum element diameter (longest edge over all triangles)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    h: float

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]


@dataclass(frozen=True)
class BoundaryMesh:
    """Boundary partition induced by a bulk mesh.

    edges: (ne, 2) pairs of bulk vertex indices, ordered along the boundary
    bnd_to_bulk: boundary-local vertex index -> bulk vertex index
    """

    edges: np.ndarray
    bnd_to_bulk: np.ndarray

    @property
    def num_vertices(self) -> int:
        return self.bnd_to_bulk.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]


@dataclass
class ValidationReport:
    """Collected invariant violations; empty report means all checks passed."""

    issues: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    quasiuniformity_ratio: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.issues


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas; positive for counter-clockwise triangles."""
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def build_unit_square_mesh(level: int) -> tuple[BulkMesh, BoundaryMesh]:
    """Uniform triangulation of (0,1)^2 with 2^level x 2^level squares.

    Each square is split along the diagonal from its lower-left to its
    upper-right corner, so meshes of consecutive levels are nested.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    n = 2**level
    xs = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ll = (iy * (n + 1) + ix).ravel()
    lr = ll + 1
    ul = ll + (n + 1)
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    # boundary loop, counter-clockwise starting at the origin
    bottom = np.arange(n + 1)
    right = n + (n + 1) * np.arange(1, n + 1)
    top = n * (n + 1) + np.arange(n - 1, -1, -1)
    left = (n + 1) * np.arange(n - 1, 0, -1)
    loop = np.concatenate([bottom, right, top, left])
    edges = np.column_stack([loop, np.roll(loop, -1)])

    h = np.sqrt(2.0) / n
    return BulkMesh(vertices, triangles, h), BoundaryMesh(edges, loop.copy())


def prolong_unit_square(level: int, values: np.ndarray) -> np.ndarray:
    """Prolong nodal values from unit-square level to level + 1.

    Exact for P1 functions because the refinement is nested: fine vertices
    are either coarse vertices or midpoints of coarse edges (including the
    lower-left to upper-right diagonals).
    """
    n = 2**level
    if values.shape[-1] != (n + 1) ** 2:
        raise ValueError("nodal vector does not match the given level")
    coarse = np.asarray(values, dtype=float).reshape(n + 1, n + 1)
    m = 2 * n
    fine = np.empty((m + 1, m + 1))
    fine[0::2, 0::2] = coarse
    fine[0::2, 1::2] = 0.5 * (coarse[:, :-1] + coarse[:, 1:])
    fine[1::2, 0::2] = 0.5 * (coarse[:-1, :] + coarse[1:, :])
    # square centers sit on the coarse diagonal
    fine[1::2, 1::2] = 0.5 * (coarse[:-1, :-1] + coarse[1:, 1:])
    return fine.ravel()


def evaluate_unit_square(level: int, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate the P1 function with the given nodal values at arbitrary points."""
    n = 2**level
    grid = np.asarray(values, dtype=float).reshape(n + 1, n + 1)
    pts = np.atleast_2d(points)
    ix = np.clip((pts[:, 0] * n).astype(int), 0, n - 1)
    iy = np.clip((pts[:, 1] * n).astype(int), 0, n - 1)
    s = pts[:, 0] * n - ix
    t = pts[:, 1] * n - iy
    v_ll = grid[iy, ix]
    v_lr = grid[iy, ix + 1]
    v_ul = grid[iy + 1, ix]
    v_ur = grid[iy + 1, ix + 1]
    lower = t <= s
    out = np.where(
        lower,
        v_ll * (1.0 - s) + v_lr * (s - t) + v_ur * t,
        v_ll * (1.0 - t) + v_ur * s + v_ul * (t - s),
    )
    return out if points.ndim > 1 else out


def _edge_lengths(vertices: np.ndarray, edges: np.ndarray) -> np.ndarray:
    d = vertices[edges[:, 1]] - vertices[edges[:, 0]]
    return np.hypot(d[:, 0], d[:, 1])


def _boundary_edge_set(triangles: np.ndarray) -> dict:
    """Map undirected edge -> list of (triangle index, directed edge) occurrences."""
    occurrences: dict = {}
    for it, tri in enumerate(triangles):
        for a in range(3):
            i, j = int(tri[a]), int(tri[(a + 1) % 3])
            occurrences.setdefault((min(i, j), max(i, j)), []).append((it, (i, j)))
    return occurrences


def validate(mesh: BulkMesh, bnd: BoundaryMesh,
             quasiuniformity_bound: float = QUASIUNIFORMITY_BOUND) -> ValidationReport:
    """Check all mesh invariants; diagnostic only, never raises."""
    report = ValidationReport()
    areas = triangle_areas(mesh.vertices, mesh.triangles)
    if np.any(areas <= 0):
        bad = np.nonzero(areas <= 0)[0]
        report.issues.append(f"{bad.size} triangles with non-positive area, e.g. index {bad[0]}")

    p = mesh.vertices[mesh.triangles]
    edge_vecs = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    lengths = np.hypot(edge_vecs[..., 0], edge_vecs[..., 1])
    diameters = lengths.max(axis=1)
    h_actual = diameters.max()
    if not np.isclose(mesh.h, h_actual, rtol=1e-12, atol=0.0):
        report.issues.append(f"stored h={mesh.h!r} differs from max element diameter {h_actual!r}")

    with np.errstate(divide="ignore", invalid="ignore"):
        incircle_diam = 4.0 * np.abs(areas) / lengths.sum(axis=1)
        ratios = diameters / incircle_diam
    report.quasiuniformity_ratio = float(np.max(ratios))
    if report.quasiuniformity_ratio > quasiuniformity_bound:
        report.warnings.append(
            f"quasiuniformity ratio {report.quasiuniformity_ratio:.3g} exceeds {quasiuniformity_bound}"
        )

    occurrences = _boundary_edge_set(mesh.triangles)
    over_shared = [e for e, occ in occurrences.items() if len(occ) > 2]
    if over_shared:
        report.issues.append(f"non-conforming mesh: edge {over_shared[0]} shared by >2 triangles")

    used = np.zeros(mesh.num_vertices, dtype=bool)
    used[mesh.triangles.ravel()] = True
    if not used.all():
        dangling = np.nonzero(~used)[0]
        report.issues.append(f"{dangling.size} vertices not referenced by any triangle, e.g. {dangling[0]}")

    free_edges = {e for e, occ in occurrences.items() if len(occ) == 1}
    declared = {(min(int(i), int(j)), max(int(i), int(j))) for i, j in bnd.edges}
    missing = free_edges - declared
    extra = declared - free_edges
    if missing:
        report.issues.append(f"boundary partition misses {len(missing)} free edges, e.g. {sorted(missing)[0]}")
    if extra:
        report.issues.append(f"boundary partition contains {len(extra)} non-boundary edges, e.g. {sorted(extra)[0]}")

    if bnd.num_edges:
        heads = bnd.edges[:, 0]
        tails = np.roll(bnd.edges[:, 1], 1)
        breaks = int(np.count_nonzero(heads != tails))
        # a single closed loop has zero breaks; k loops stored contiguously have k
        # wrap-around "breaks" counted once each, which the successor multiset check covers
        succ_ok = sorted(bnd.edges[:, 0].tolist()) == sorted(bnd.edges[:, 1].tolist())
        if not succ_ok:
            report.issues.append("boundary edges do not close into loops")
        elif breaks != 0 and not _forms_loops(bnd.edges):
            report.issues.append("boundary edge sequence is not ordered into closed loops")

    if np.unique(bnd.bnd_to_bulk).size != bnd.bnd_to_bulk.size:
        report.issues.append("bnd_to_bulk map is not injective")
    if bnd.num_edges and set(bnd.bnd_to_bulk.tolist()) != set(bnd.edges.ravel().tolist()):
        report.issues.append("bnd_to_bulk vertices do not match boundary edge endpoints")

    return report


def _forms_loops(edges: np.ndarray) -> bool:
    succ = {int(i): int(j) for i, j in edges}
    if len(succ) != edges.shape[0]:
        return False
    remaining = set(succ)
    while remaining:
        start = next(iter(remaining))
        v = start
        while True:
            remaining.discard(v)
            v = succ.get(v)
            if v is None:
                return False
            if v == start:
                break
            if v not in remaining:
                return False
    return True


def _order_boundary_loops(triangles: np.ndarray) -> np.ndarray:
    """Extract free edges and order them into loops, interior on the left."""
    occurrences = _boundary_edge_set(triangles)
    directed = {}
    for occ in occurrences.values():
        if len(occ) == 1:
            _, (i, j) = occ[0]
            if i in directed:
                raise MeshError(f"boundary is not a 1-manifold at vertex {i}")
            directed[i] = j
    if not directed:
        raise MeshError("mesh has no boundary edges")
    ordered = []
    remaining = dict(directed)
    while remaining:
        start = min(remaining)
        v = start
        while True:
            nxt = remaining.pop(v, None)
            if nxt is None:
                raise MeshError(f"open boundary loop at vertex {v}")
            ordered.append((v, nxt))
            v = nxt
            if v == start:
                break
    return np.array(ordered, dtype=np.int64)


def load_mesh(path) -> tuple[BulkMesh, BoundaryMesh]:
    """Read a mesh from the text format: 'nv nt ne' header, then vertices,
    triangles (0-based), and boundary edges; '#' starts a comment."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if len(tokens) < 3:
        raise MeshError(f"{path}: missing header")
    try:
        nv, nt, ne = (int(t) for t in tokens[:3])
        data = [float(t) for t in tokens[3:]]
    except ValueError as exc:
        raise MeshError(f"{path}: {exc}") from exc
    expected = 2 * nv + 3 * nt + 2 * ne
    if len(data) != expected:
        raise MeshError(f"{path}: expected {expected} values after header, got {len(data)}")
    pos = 0
    vertices = np.array(data[pos:pos + 2 * nv]).reshape(nv, 2)
    pos += 2 * nv
    triangles = np.array(data[pos:pos + 3 * nt], dtype=np.int64).reshape(nt, 3)
    pos += 3 * nt
    file_edges = np.array(data[pos:], dtype=np.int64).reshape(ne, 2)
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshError(f"{path}: triangle vertex index out of range")

    areas = triangle_areas(vertices, triangles)
    if np.any(areas == 0):
        raise MeshError(f"{path}: degenerate (zero-area) triangle")
    flipped = areas < 0
    if flipped.any():
        warnings.warn(f"{path}: reoriented {int(flipped.sum())} clockwise triangles")
        triangles = triangles.copy()
        triangles[flipped] = triangles[flipped][:, ::-1]

    edges = _order_boundary_loops(triangles)
    if ne:
        declared = {(min(int(i), int(j)), max(int(i), int(j))) for i, j in file_edges}
        found = {(min(int(i), int(j)), max(int(i), int(j))) for i, j in edges}
        if declared != found:
            raise MeshError(f"{path}: declared boundary edges do not match the mesh boundary")

    p = vertices[triangles]
    lengths = np.hypot(*(np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
                         .transpose(2, 0, 1)))
    h = float(lengths.max())
    loop_vertices = edges[:, 0].copy()
    mesh = BulkMesh(vertices, triangles, h)
    bnd = BoundaryMesh(edges, loop_vertices)
    report = validate(mesh, bnd)
    if not report.ok:
        raise MeshError(f"{path}: " + "; ".join(report.issues))
    return mesh, bnd
