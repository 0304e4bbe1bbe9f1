"""Synthetic meshes and piecewise-constant test images."""

from __future__ import annotations

import numpy as np

from .errors import InvalidParams
from .imaging import MeshImage
from .mesh import TriangleMesh

# Patterns use two intensities so that restored regions are easy to compare.
PATTERN_LOW = 0.25
PATTERN_HIGH = 0.75

# Great-circle normal for the two-patch split; chosen off-axis so no
# icosphere vertex lands exactly on the plane.
_PATCH_NORMAL = np.array([1.0, 2.0, 3.0]) / np.sqrt(14.0)

_MAX_SUBDIVISIONS = 8


def icosahedron() -> TriangleMesh:
    """Regular icosahedron with unit circumradius."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return TriangleMesh(verts, faces)


def icosphere(level: int) -> TriangleMesh:
    """Icosahedron subdivided ``level`` times, vertices projected to the unit
    sphere.  Vertex count is 10 * 4**level + 2."""
    if not 0 <= level <= _MAX_SUBDIVISIONS:
        raise InvalidParams(
            f"subdivision level must be in [0, {_MAX_SUBDIVISIONS}], got {level}"
        )
    mesh = icosahedron()
    verts = list(mesh.vertices)
    faces = mesh.triangles
    for _ in range(level):
        midpoint: dict[tuple[int, int], int] = {}

        def midpoint_index(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            idx = midpoint.get(key)
            if idx is None:
                point = verts[i] + verts[j]
                point = point / np.linalg.norm(point)
                verts.append(point)
                idx = len(verts) - 1
                midpoint[key] = idx
            return idx

        new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
        for n, (a, b, c) in enumerate(faces):
            ab = midpoint_index(a, b)
            bc = midpoint_index(b, c)
            ca = midpoint_index(c, a)
            new_faces[4 * n : 4 * n + 4] = [
                [a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca],
            ]
        faces = new_faces
    return TriangleMesh(np.array(verts), faces)


def planar_grid(n: int, extent: float = 1.0) -> TriangleMesh:
    """Unit-square grid in the z = 0 plane with n x n vertices and
    2 * (n - 1)^2 triangles."""
    if n < 2:
        raise InvalidParams("grid needs at least 2 vertices per side")
    axis = np.linspace(0.0, extent, n)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(n * n)])
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            v00 = i * n + j
            v10 = (i + 1) * n + j
            faces.append([v00, v10, v00 + 1])
            faces.append([v10, v10 + 1, v00 + 1])
    return TriangleMesh(verts, np.array(faces))


def two_patch_image(mesh: TriangleMesh) -> MeshImage:
    """Two constant regions split by a fixed great circle through the origin."""
    side = mesh.vertices @ _PATCH_NORMAL >= 0.0
    return MeshImage(np.where(side, PATTERN_HIGH, PATTERN_LOW))


def checker_image(mesh: TriangleMesh, lat_bands: int = 4,
                  lon_bands: int = 8) -> MeshImage:
    """Alternating constant cells over latitude/longitude bands."""
    if lat_bands < 1 or lon_bands < 1:
        raise InvalidParams("band counts must be positive")
    v = mesh.vertices
    radius = np.linalg.norm(v, axis=1)
    theta = np.arccos(np.clip(v[:, 2] / np.where(radius > 0, radius, 1.0), -1, 1))
    phi = np.arctan2(v[:, 1], v[:, 0])
    lat = np.minimum((theta / np.pi * lat_bands).astype(int), lat_bands - 1)
    lon = np.minimum(((phi + np.pi) / (2 * np.pi) * lon_bands).astype(int),
                     lon_bands - 1)
    parity = (lat + lon) % 2 == 0
    return MeshImage(np.where(parity, PATTERN_HIGH, PATTERN_LOW))


def generate_synthetic(kind: str, params: dict | None = None):
    """Build a (mesh, image) test pair.

    Kinds: ``icosphere_k`` (icosphere mesh, pattern selectable via
    ``pattern``), ``two_patch`` and ``checker`` (icosphere with the named
    pattern).  ``params`` accepts ``k`` (subdivision level, default 3) and,
    for checker, ``lat_bands`` / ``lon_bands``.
    """
    params = dict(params or {})
    try:
        k = int(params.pop("k", 3))
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"bad subdivision level: {params.get('k')!r}") from exc

    if kind == "icosphere_k":
        pattern = params.pop("pattern", "two_patch")
    elif kind in ("two_patch", "checker"):
        pattern = kind
    else:
        raise InvalidParams(f"unknown synthetic kind: {kind!r}")

    mesh = icosphere(k)
    if pattern == "two_patch":
        if params:
            raise InvalidParams(f"unexpected parameters: {sorted(params)}")
        return mesh, two_patch_image(mesh)
    if pattern == "checker":
        lat = int(params.pop("lat_bands", 4))
        lon = int(params.pop("lon_bands", 8))
        if params:
            raise InvalidParams(f"unexpected parameters: {sorted(params)}")
        return mesh, checker_image(mesh, lat, lon)
    raise InvalidParams(f"unknown pattern: {pattern!r}")
