"""Indexed triangle meshes: closing a height field into a solid, and validation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .heightmap import HeightField

# twice the minimum area, compared against |cross|
_MIN_CROSS = 2e-12


class DegenerateMeshError(ValueError):
    pass


@dataclass
class TriangleMesh:
    """Vertices (V, 3), facets (F, 3) vertex indices, normals (F, 3).

    Facets wind counterclockwise seen from outside.  When ``normals`` is
    omitted they are computed from the winding.
    """

    vertices: np.ndarray
    facets: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.facets = np.asarray(self.facets, dtype=np.int64).reshape(-1, 3)
        if self.facets.size and (self.facets.min() < 0 or self.facets.max() >= len(self.vertices)):
            raise ValueError("facet index out of range")
        if self.normals is None:
            self.normals = facet_normals(self.vertices, self.facets)
        else:
            self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(self.normals) != len(self.facets):
                raise ValueError("need one normal per facet")

    def __len__(self):
        return len(self.facets)

    @property
    def triangles(self) -> np.ndarray:
        """Corner coordinates, shape (F, 3, 3)."""
        return self.vertices[self.facets]

    def bounds(self) -> np.ndarray:
        return np.array([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    def without_facet(self, index: int) -> "TriangleMesh":
        keep = np.ones(len(self.facets), dtype=bool)
        keep[index] = False
        return TriangleMesh(self.vertices, self.facets[keep], self.normals[keep])

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=np.float64),
                            self.facets, self.normals)

    @classmethod
    def concatenate(cls, *meshes: "TriangleMesh") -> "TriangleMesh":
        verts, facets, normals, base = [], [], [], 0
        for m in meshes:
            verts.append(m.vertices)
            facets.append(m.facets + base)
            normals.append(m.normals)
            base += len(m.vertices)
        return cls(np.concatenate(verts), np.concatenate(facets), np.concatenate(normals))


def _unit_cross(v0, v1, v2):
    c = np.cross(v1 - v0, v2 - v0)
    return c, np.linalg.norm(c, axis=-1)


def facet_normal(v0, v1, v2) -> np.ndarray:
    """Unit normal ``(v1 - v0) x (v2 - v0)``; raises on a degenerate triangle."""
    v0, v1, v2 = (np.asarray(v, dtype=np.float64) for v in (v0, v1, v2))
    c, n = _unit_cross(v0, v1, v2)
    if not n > _MIN_CROSS:
        raise DegenerateMeshError(f"degenerate triangle {v0.tolist()}, {v1.tolist()}, {v2.tolist()}")
    return c / n + 0.0


def facet_normals(vertices, facets) -> np.ndarray:
    """Vectorized :func:`facet_normal`; degenerate facets get a zero normal."""
    tri = np.asarray(vertices, dtype=np.float64)[np.asarray(facets, dtype=np.int64)]
    if len(tri) == 0:
        return np.zeros((0, 3))
    c, n = _unit_cross(tri[:, 0], tri[:, 1], tri[:, 2])
    out = np.zeros_like(c)
    ok = n > _MIN_CROSS
    out[ok] = c[ok] / n[ok, None]
    return out + 0.0


def expected_facet_count(rows: int, cols: int) -> int:
    return 4 * (cols - 1) * (rows - 1) + 4 * (cols - 1) + 4 * (rows - 1)


def heightfield_to_mesh(hf: HeightField) -> TriangleMesh:
    """Close a height field into a watertight solid sitting on z = 0.

    Vertices: the top grid at ``z = base + height`` (index ``i*cols + j``)
    followed by the bottom grid at ``z = 0``.  Each cell splits along the
    ``(i, j) -> (i+1, j+1)`` diagonal; the bottom mirrors the top with the
    opposite winding, and each boundary edge gets a two-triangle wall.

    Every point must have positive total thickness ``base + height``,
    otherwise walls collapse and the top touches the build plate.
    """
    rows, cols = hf.rows, hf.cols
    if rows < 2 or cols < 2:
        raise DegenerateMeshError(f"height field must be at least 2x2, got {rows}x{cols}")
    top_z = hf.base + hf.heights
    if not np.all(top_z > 0):
        raise DegenerateMeshError("zero total thickness (base + height == 0) somewhere in the field")

    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    x = (jj * hf.dx).ravel()
    y = (ii * hf.dy).ravel()
    n = rows * cols
    vertices = np.empty((2 * n, 3))
    vertices[:n, 0] = vertices[n:, 0] = x
    vertices[:n, 1] = vertices[n:, 1] = y
    vertices[:n, 2] = top_z.ravel()
    vertices[n:, 2] = 0.0

    idx = np.arange(n).reshape(rows, cols)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    top = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    bottom = np.concatenate([np.stack([a, c, b], 1), np.stack([a, d, c], 1)]) + n

    # boundary walked counterclockwise seen from +z, so outside is on the right
    ring = np.concatenate([
        idx[0, :],
        idx[1:, -1],
        idx[-1, -2::-1],
        idx[-2:0:-1, 0],
    ])
    p = ring
    q = np.roll(ring, -1)
    walls = np.concatenate([np.stack([p, p + n, q + n], 1), np.stack([p, q + n, q], 1)])

    facets = np.concatenate([top, bottom, walls])
    return TriangleMesh(vertices, facets)


@dataclass
class MeshReport:
    """Findings from :func:`validate`.  Edges are sorted vertex-index pairs."""

    vertex_count: int
    edge_count: int
    facet_count: int
    euler_characteristic: int
    shells: int
    boundary_edges: list = field(default_factory=list)
    nonmanifold_edges: list = field(default_factory=list)
    misoriented_edges: list = field(default_factory=list)
    degenerate_facets: list = field(default_factory=list)
    normal_mismatches: list = field(default_factory=list)

    @property
    def defects(self) -> list[str]:
        out = []
        for e in self.boundary_edges:
            out.append(f"boundary edge {e}")
        for e in self.nonmanifold_edges:
            out.append(f"non-manifold edge {e}")
        for e in self.misoriented_edges:
            out.append(f"inconsistent winding across edge {e}")
        for f in self.degenerate_facets:
            out.append(f"degenerate facet {f}")
        for f in self.normal_mismatches:
            out.append(f"stored normal disagrees with winding on facet {f}")
        if self.shells != 1:
            out.append(f"{self.shells} shells, expected 1")
        return out

    @property
    def watertight(self) -> bool:
        return not self.defects


def validate(mesh: TriangleMesh, normal_tol: float = 1e-6) -> MeshReport:
    """Check manifoldness, winding consistency, normals and connectivity.

    An empty ``defects`` list means a watertight, consistently oriented
    single shell.  The Euler characteristic counts referenced vertices only.
    """
    f = mesh.facets
    nf = len(f)
    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    nv = max(len(mesh.vertices), 1)
    keys, inverse, counts = np.unique(undirected[:, 0] * nv + undirected[:, 1],
                                      return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    uniq = np.stack([keys // nv, keys % nv], axis=1)

    boundary = [tuple(int(v) for v in e) for e in uniq[counts == 1]]
    nonmanifold = [tuple(int(v) for v in e) for e in uniq[counts > 2]]

    # a shared edge is consistently wound when its two uses run in opposite directions
    forward = (directed[:, 0] < directed[:, 1]).astype(np.int64)
    fwd_count = np.bincount(inverse, weights=forward, minlength=len(uniq)).astype(np.int64)
    pair = counts == 2
    misoriented = [tuple(int(v) for v in e) for e in uniq[pair & (fwd_count != 1)]]

    recomputed = facet_normals(mesh.vertices, f)
    degenerate = [int(i) for i in np.flatnonzero(~np.any(recomputed, axis=1))]
    mismatch = np.linalg.norm(recomputed - mesh.normals, axis=1) > normal_tol
    mismatch[degenerate] = False
    normal_mismatches = [int(i) for i in np.flatnonzero(mismatch)]

    used = np.unique(f)
    if nf:
        remap = np.full(len(mesh.vertices), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        e = remap[uniq]
        graph = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(len(used),) * 2)
        shells, _ = connected_components(graph, directed=False)
    else:
        shells = 0

    return MeshReport(
        vertex_count=len(used),
        edge_count=len(uniq),
        facet_count=nf,
        euler_characteristic=int(len(used) - len(uniq) + nf),
        shells=int(shells),
        boundary_edges=boundary,
        nonmanifold_edges=nonmanifold,
        misoriented_edges=misoriented,
        degenerate_facets=degenerate,
        normal_mismatches=normal_mismatches,
    )


def box_mesh(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Axis-aligned box as a 2x2 height field (12 facets)."""
    sx, sy, sz = size
    hf = HeightField(np.full((2, 2), float(sz)), dx=sx, dy=sy)
    return heightfield_to_mesh(hf).translated(origin)
