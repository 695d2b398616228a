"""Planar slicing of a mesh into closed per-layer loops.

Vertices lying exactly on a cutting plane count as above it, so each
crossing is a clean two-edge case and no segments are duplicated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mesh import TriangleMesh


class OpenChainError(ValueError):
    """Segments did not close into loops: the mesh is not watertight or tol is too small."""


@dataclass
class SlicePolygon:
    """Closed loops at height ``z``; outer boundaries run counterclockwise, holes clockwise."""

    z: float
    loops: list = field(default_factory=list)

    @property
    def perimeter(self) -> float:
        return float(sum(loop_length(l) for l in self.loops))

    @property
    def area(self) -> float:
        return float(sum(signed_area(l) for l in self.loops))


def loop_length(loop) -> float:
    loop = np.asarray(loop)
    return float(np.linalg.norm(np.roll(loop, -1, axis=0) - loop, axis=1).sum())


def signed_area(loop) -> float:
    """Shoelace area, positive for counterclockwise loops."""
    x, y = np.asarray(loop, dtype=np.float64).T
    # consecutive cross products, plus the closing edge
    return 0.5 * float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]) + x[-1] * y[0] - x[0] * y[-1])


def _point_in_loop(pt, loop) -> bool:
    x, y = pt
    xs, ys = loop[:, 0], loop[:, 1]
    nxt = np.append(loop[1:], loop[:1], axis=0)
    xn, yn = nxt[:, 0], nxt[:, 1]
    crosses = (ys > y) != (yn > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xs + (y - ys) * (xn - xs) / (yn - ys)
    return bool(np.count_nonzero(crosses & (x < xint)) % 2)


def slice_at(mesh: TriangleMesh, z: float) -> np.ndarray:
    """Intersection segments of the mesh with the plane at ``z``, shape (n, 2, 2).

    Each straddling triangle contributes the segment joining the points where
    its two crossing edges meet the plane (linear interpolation).
    """
    tris = mesh.triangles
    if len(tris) == 0:
        return np.zeros((0, 2, 2))
    above = tris[:, :, 2] >= z
    n_above = above.sum(axis=1)
    cut = (n_above == 1) | (n_above == 2)
    tris, above = tris[cut], above[cut]
    if len(tris) == 0:
        return np.zeros((0, 2, 2))

    # the lone vertex is the one whose side differs from the other two
    lone_is_above = above.sum(axis=1) == 1
    lone = np.where(lone_is_above, np.argmax(above, axis=1), np.argmin(above, axis=1))
    rows = np.arange(len(tris))
    p = tris[rows, lone]
    q1 = tris[rows, (lone + 1) % 3]
    q2 = tris[rows, (lone + 2) % 3]

    def cross_point(a, b):
        t = (z - a[:, 2]) / (b[:, 2] - a[:, 2])
        return a[:, :2] + t[:, None] * (b[:, :2] - a[:, :2])

    seg = np.stack([cross_point(p, q1), cross_point(p, q2)], axis=1)
    # an apex touching the plane from below yields a point, not a segment
    nonzero = np.any(seg[:, 0] != seg[:, 1], axis=1)
    return seg[nonzero]


def stitch_loops(segments, tol: float = 1e-6, z: float = 0.0) -> SlicePolygon:
    """Join segments whose endpoints match within ``tol`` into closed loops.

    Every segment is used exactly once.  Loops are oriented by nesting depth:
    even depth (outer boundary) counterclockwise, odd depth (hole) clockwise.
    Raises :class:`OpenChainError` when some endpoint has an odd number of
    incident segments.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    seg = np.asarray(segments, dtype=np.float64).reshape(-1, 2, 2)
    if len(seg) == 0:
        return SlicePolygon(z, [])

    pts = seg.reshape(-1, 2)
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                       shape=(len(pts), len(pts)))
    _, label = connected_components(graph, directed=False)
    node = label.reshape(-1, 2)

    # first endpoint seen stands for its cluster
    first = np.full(label.max() + 1, len(pts))
    np.minimum.at(first, label, np.arange(len(pts)))
    where = pts[first]

    edges = [(int(a), int(b)) for a, b in node if a != b]
    adjacency: dict[int, list[int]] = {}
    for k, (a, b) in enumerate(edges):
        adjacency.setdefault(a, []).append(k)
        adjacency.setdefault(b, []).append(k)
    odd = [n for n, inc in adjacency.items() if len(inc) % 2]
    if odd:
        raise OpenChainError(f"{len(odd)} dangling endpoints, e.g. at {where[odd[0]].tolist()}")

    used = np.zeros(len(edges), dtype=bool)
    loops = []
    for start_edge in range(len(edges)):
        if used[start_edge]:
            continue
        used[start_edge] = True
        a, b = edges[start_edge]
        chain = [a]
        current = b
        while current != a:
            chain.append(current)
            nxt = next(k for k in adjacency[current] if not used[k])
            used[nxt] = True
            u, v = edges[nxt]
            current = v if u == current else u
        if len(chain) >= 3:
            loops.append(where[chain])

    return SlicePolygon(z, _orient_by_depth(loops))


def _orient_by_depth(loops):
    if not loops:
        return []
    boxes = np.array([[l[:, 0].min(), l[:, 1].min(), l[:, 0].max(), l[:, 1].max()] for l in loops])
    oriented = []
    for i, loop in enumerate(loops):
        # an edge midpoint cannot lie on another loop of a manifold slice
        probe = (loop[0] + loop[1]) / 2
        inside_box = ((boxes[:, 0] <= probe[0]) & (probe[0] <= boxes[:, 2])
                      & (boxes[:, 1] <= probe[1]) & (probe[1] <= boxes[:, 3]))
        inside_box[i] = False
        depth = sum(_point_in_loop(probe, loops[j]) for j in np.flatnonzero(inside_box))
        if (signed_area(loop) > 0) != (depth % 2 == 0):
            loop = loop[::-1]
        oriented.append(loop)
    return oriented


def layer_heights(mesh: TriangleMesh, dz: float) -> list[float]:
    """Mid-layer cutting heights over the mesh's z extent.

    Layer ``k`` spans ``[zlo + k*dz, min(zlo + (k+1)*dz, zhi)]`` and is cut
    at its middle, so with evenly dividing ``dz`` the planes sit at
    ``zlo + dz/2 + k*dz``.
    """
    if not dz > 0:
        raise ValueError(f"dz must be positive, got {dz}")
    if len(mesh.facets) == 0:
        return []
    zs = mesh.triangles[:, :, 2]
    zlo, zhi = float(zs.min()), float(zs.max())
    n = max(1, math.ceil((zhi - zlo) / dz - 1e-9))
    return [zlo + (k * dz + min((k + 1) * dz, zhi - zlo)) / 2 for k in range(n)]


def slice_all(mesh: TriangleMesh, dz: float, tol: float = 1e-6) -> list[SlicePolygon]:
    """Slice at every layer height, ascending; empty layers are dropped."""
    out = []
    for z in layer_heights(mesh, dz):
        poly = stitch_loops(slice_at(mesh, z), tol, z)
        if poly.loops:
            out.append(poly)
    return out


def layer_svg(poly: SlicePolygon, margin: float = 1.0) -> str:
    """Render one layer as SVG; 1 user unit = 1 mm, y pointing up."""
    if poly.loops:
        allpts = np.concatenate(poly.loops)
        lo, hi = allpts.min(axis=0) - margin, allpts.max(axis=0) + margin
    else:
        lo, hi = np.zeros(2), np.full(2, 2 * margin)
    w, h = hi - lo
    paths = []
    for loop in poly.loops:
        d = " ".join(f"{'M' if i == 0 else 'L'}{x:.6g},{y:.6g}" for i, (x, y) in enumerate(loop))
        paths.append(f'  <path d="{d} Z"/>')
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.6g}mm" height="{h:.6g}mm" '
        f'viewBox="{lo[0]:.6g} {-hi[1]:.6g} {w:.6g} {h:.6g}">\n'
        f'<!-- z = {poly.z:.6g} mm -->\n'
        f'<g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="0.1" '
        f'fill-rule="evenodd">\n' + "\n".join(paths) + "\n</g>\n</svg>\n"
    )
