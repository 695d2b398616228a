"""ASCII and binary STL reading and writing."""
from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh, facet_normals

BINARY_DTYPE = np.dtype([
    ("normal", "<f4", (3,)),
    ("vertices", "<f4", (3, 3)),
    ("attr", "<u2"),
])
HEADER_SIZE = 80


class StlError(ValueError):
    pass


def _num(x: float) -> str:
    # repr is the shortest string that round-trips; +0.0 folds -0.0
    return repr(float(x) + 0.0)


def write_stl_ascii(mesh: TriangleMesh, name: str = "relief") -> bytes:
    """Serialize as ASCII STL, one ``facet normal ... endfacet`` block per facet."""
    name = name.replace("\n", " ").strip()
    lines = [f"solid {name}".rstrip()]
    for normal, tri in zip(mesh.normals, mesh.triangles):
        lines.append("  facet normal " + " ".join(map(_num, normal)))
        lines.append("    outer loop")
        for v in tri:
            lines.append("      vertex " + " ".join(map(_num, v)))
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}".rstrip())
    return ("\n".join(lines) + "\n").encode("ascii")


def _binary_header(header: str | bytes) -> bytes:
    raw = header.encode("ascii", "replace") if isinstance(header, str) else bytes(header)
    # readers sniff a leading "solid" as ASCII
    if raw[:5].lower() == b"solid":
        raw = b"binary " + raw
    return raw[:HEADER_SIZE].ljust(HEADER_SIZE, b"\0")


def write_stl_binary(mesh: TriangleMesh, header: str | bytes = "") -> bytes:
    """Serialize as little-endian binary STL: exactly ``84 + 50 * F`` bytes."""
    count = len(mesh.facets)
    if count >= 2 ** 32:
        raise StlError(f"binary STL holds fewer than 2**32 facets, got {count}")
    records = np.zeros(count, dtype=BINARY_DTYPE)
    records["normal"] = mesh.normals
    records["vertices"] = mesh.triangles
    return _binary_header(header) + np.uint32(count).astype("<u4").tobytes() + records.tobytes()


def read_stl(data: bytes) -> TriangleMesh:
    """Parse ASCII or binary STL.

    Binary is recognised by the size law ``84 + 50 * F`` (even when the
    header begins with "solid"); otherwise a leading "solid" means ASCII.
    Coincident corners are merged into shared vertices in first-seen order.
    Stored normals are kept unless zero, in which case they are recomputed.
    """
    data = bytes(data)
    if len(data) >= HEADER_SIZE + 4:
        count = int(np.frombuffer(data, "<u4", 1, HEADER_SIZE)[0])
        if len(data) == HEADER_SIZE + 4 + 50 * count:
            return _read_binary(data, count)
    if data.lstrip()[:5] == b"solid":
        return _read_ascii(data)
    if len(data) < HEADER_SIZE + 4:
        raise StlError(f"{len(data)} bytes is below the 84-byte binary STL minimum")
    count = int(np.frombuffer(data, "<u4", 1, HEADER_SIZE)[0])
    raise StlError(f"binary STL declares {count} facets ({HEADER_SIZE + 4 + 50 * count} bytes) "
                   f"but file has {len(data)} bytes")


def _read_binary(data: bytes, count: int) -> TriangleMesh:
    rec = np.frombuffer(data, BINARY_DTYPE, count, HEADER_SIZE + 4)
    tris = rec["vertices"].astype(np.float64)
    normals = rec["normal"].astype(np.float64)
    return _assemble(tris, normals)


def _read_ascii(data: bytes) -> TriangleMesh:
    text = data.decode("ascii", "replace")
    first_nl = text.find("\n")
    body = text[first_nl + 1:] if first_nl >= 0 else ""
    tokens = body.split()
    pos = 0
    tris, normals = [], []

    def expect(word):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != word:
            got = tokens[pos] if pos < len(tokens) else "end of file"
            raise StlError(f"expected {word!r}, got {got!r} (facet {len(tris)})")
        pos += 1

    def floats(k):
        nonlocal pos
        if pos + k > len(tokens):
            raise StlError(f"unexpected end of file in facet {len(tris)}")
        try:
            vals = [float(t) for t in tokens[pos:pos + k]]
        except ValueError as exc:
            raise StlError(f"bad number in facet {len(tris)}: {exc}") from None
        pos += k
        return vals

    while True:
        if pos >= len(tokens):
            raise StlError("missing 'endsolid'")
        if tokens[pos] == "endsolid":
            break
        expect("facet")
        expect("normal")
        n = floats(3)
        expect("outer")
        expect("loop")
        tri = []
        for _ in range(3):
            expect("vertex")
            tri.append(floats(3))
        expect("endloop")
        expect("endfacet")
        tris.append(tri)
        normals.append(n)

    return _assemble(np.array(tris, dtype=np.float64).reshape(-1, 3, 3),
                     np.array(normals, dtype=np.float64).reshape(-1, 3))


def _assemble(tris: np.ndarray, normals: np.ndarray) -> TriangleMesh:
    if not (np.all(np.isfinite(tris)) and np.all(np.isfinite(normals))):
        raise StlError("non-finite coordinate or normal")
    corners = tris.reshape(-1, 3)
    if len(corners):
        uniq, first, inverse = np.unique(corners, axis=0, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        vertices = uniq[order]
        facets = rank[inverse.ravel()].reshape(-1, 3)
    else:
        vertices = np.zeros((0, 3))
        facets = np.zeros((0, 3), dtype=np.int64)
    normals = normals.copy()
    zero = ~np.any(normals, axis=1)
    if zero.any():
        normals[zero] = facet_normals(vertices, facets[zero])
    return TriangleMesh(vertices, facets, normals)
