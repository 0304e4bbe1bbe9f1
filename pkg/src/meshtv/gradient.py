"""Discrete gradient of piecewise-linear vertex data on a triangle mesh.

The gradient of the linear interpolant is constant on each triangle.  For a
triangle [a, b, c], the hat function of vertex a has gradient h / |h|^2 where
h = a - proj(a) and proj(a) is the Euclidean projection of a onto the line
through b and c.  Stacking the three hat-gradient columns per triangle gives
a sparse linear operator from vertex values to per-triangle 3-vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTriangle, DimensionMismatch
from .mesh import TriangleMesh, triangle_areas


@dataclass(frozen=True)
class GradientOperator:
    """Per-triangle gradient blocks of a mesh, plus a fast sparse form.

    ``columns[i, m]`` is the 3-vector multiplying the value at vertex
    ``triangles[i, m]`` in the gradient on triangle i; all other columns of
    block i are zero.  ``matrix`` assembles the same data as a
    (3 * n_triangles, n_vertices) CSR operator so that applying the operator
    and its adjoint are single sparse products.
    """

    triangles: np.ndarray        # (n_tri, 3) vertex ids
    columns: np.ndarray          # (n_tri, 3, 3) hat-gradient columns
    tri_areas: np.ndarray        # (n_tri,)
    block_norms: np.ndarray      # (n_tri,) spectral norm of each block
    n_vertices: int
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


def build_gradient_operator(mesh: TriangleMesh) -> GradientOperator:
    """Assemble the gradient operator of a validated mesh."""
    verts = mesh.vertices
    tris = mesh.triangles
    n_tri = tris.shape[0]

    columns = np.empty((n_tri, 3, 3))
    for m in range(3):
        a = verts[tris[:, m]]
        b = verts[tris[:, (m + 1) % 3]]
        c = verts[tris[:, (m + 2) % 3]]
        edge = c - b
        tpar = np.einsum("ij,ij->i", a - b, edge) / np.einsum("ij,ij->i", edge, edge)
        h = a - (b + tpar[:, None] * edge)
        hh = np.einsum("ij,ij->i", h, h)
        if np.any(hh <= 0.0) or not np.all(np.isfinite(hh)):
            raise DegenerateTriangle("zero-height triangle slipped past validation")
        columns[:, m, :] = h / hh[:, None]

    areas = triangle_areas(mesh)

    # spectral norm of each block from the 3x3 Gram of its nonzero columns
    grams = np.einsum("tmr,tnr->tmn", columns, columns)
    eigs = np.linalg.eigvalsh(grams)
    block_norms = np.sqrt(np.maximum(eigs[:, -1], 0.0))

    rows = np.repeat(3 * np.arange(n_tri), 9) + np.tile(np.tile(np.arange(3), 3), n_tri)
    cols = np.repeat(tris.ravel(), 3)
    # data order must match: triangle i, slot m, component r
    data = columns.reshape(n_tri * 3, 3).ravel()
    matrix = sp.coo_matrix(
        (data, (rows, cols)), shape=(3 * n_tri, mesh.n_vertices)
    ).tocsr()

    for arr in (columns, areas, block_norms):
        arr.setflags(write=False)
    return GradientOperator(
        triangles=tris,
        columns=columns,
        tri_areas=areas,
        block_norms=block_norms,
        n_vertices=mesh.n_vertices,
        matrix=matrix,
    )


def apply(op: GradientOperator, u: np.ndarray) -> np.ndarray:
    """Gradient of vertex data: (n_tri, 3) for 1-D input, (n_tri, 3, c) for 2-D."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] != op.n_vertices:
        raise DimensionMismatch(
            f"expected {op.n_vertices} vertex values, got {u.shape[0]}"
        )
    flat = op.matrix @ u
    if u.ndim == 1:
        return flat.reshape(-1, 3)
    return flat.reshape(-1, 3, u.shape[1])


def apply_adjoint(
    op: GradientOperator, z: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Weighted adjoint: sum_i weights[i] * D_i^T z[i].

    ``z`` has shape (n_tri, 3) or (n_tri, 3, c); ``weights`` has one entry
    per triangle.  Returns per-vertex data matching the trailing shape of z.
    """
    z = np.asarray(z, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if z.shape[0] != op.n_triangles or z.shape[1] != 3:
        raise DimensionMismatch(f"bad gradient-data shape {z.shape}")
    if weights.shape != (op.n_triangles,):
        raise DimensionMismatch("weights must have one entry per triangle")
    if z.ndim == 2:
        zw = (z * weights[:, None]).reshape(-1)
    else:
        zw = (z * weights[:, None, None]).reshape(-1, z.shape[2])
    return op.matrix.T @ zw


def assemble_gram(op: GradientOperator) -> sp.csr_matrix:
    """Area-weighted Gram matrix sum_i |tau_i| D_i^T D_i (sparse, symmetric PSD).

    Constant vectors on each connected component lie in its kernel.  The
    matrix only depends on the mesh, so it is assembled once and reused for
    every solver configuration.
    """
    warea = np.repeat(op.tri_areas, 3)
    weighted = sp.diags(warea) @ op.matrix
    gram = (op.matrix.T @ weighted).tocsr()
    gram = (gram + gram.T) * 0.5
    return gram.tocsr()


def block_spectral_norms(op: GradientOperator) -> np.ndarray:
    """Largest singular value of each triangle's gradient block."""
    return op.block_norms.copy()
