"""ADMM solver for the convex inner subproblems.

Each outer iteration of the Lp-TV solver minimizes a weighted-L1 + TV +
proximal objective over the vertex values, with the off-support values pinned
to the observed data.  Splitting the fidelity residuals (y) and the
per-triangle gradients (z) out of the vertex variable (v) makes every step
closed-form: scalar and group soft-thresholding for (y, z), a sparse SPD
normal equation for v, then gradient-ascent multiplier updates.

The same loop with full support, unit weights, and zero proximal weight is
the plain L1-TV solver used as a warm start.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import gradient
from .config import SolverConfig, SupportSet
from .errors import (
    DimensionMismatch,
    IterationLimitExceeded,
    NonFiniteIterate,
    SingularSystem,
)
from .gradient import GradientOperator, assemble_gram
from .imaging import MeshImage

# Above this size the normal equation switches from a direct factorization to
# Jacobi-preconditioned CG.
DIRECT_SOLVE_MAX_VERTICES = 50_000


def shrink_1d(x, threshold):
    """Soft thresholding: the exact minimizer of threshold*|t| + (t - x)^2 / 2.

    Accepts scalars or arrays; ``threshold`` broadcasts against ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)
    return float(out) if out.ndim == 0 else out


def shrink_vec(x, threshold):
    """Group soft thresholding of a single vector.

    Shrinks the Euclidean norm by ``threshold`` and keeps the direction;
    returns the zero vector whenever ||x|| <= threshold (in particular for
    x = 0, following the 0 * (0/0) = 0 convention).
    """
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if norm <= threshold:
        return np.zeros_like(x)
    return (1.0 - threshold / norm) * x


def _shrink_groups(a: np.ndarray, threshold: float) -> np.ndarray:
    """Row-wise group shrinkage of an (n, ...) stack (norm over trailing axes)."""
    flat = a.reshape(a.shape[0], -1)
    norms = np.linalg.norm(flat, axis=1)
    scale = np.zeros_like(norms)
    active = norms > threshold
    scale[active] = 1.0 - threshold / norms[active]
    return a * scale.reshape((-1,) + (1,) * (a.ndim - 1))


class NormalEquationSystem:
    """The SPD vertex system beta2 * Gram + (prox_weight + beta1) * I.

    The matrix is independent of the support set, so one factorization (or
    preconditioner) serves every inner iteration and, for fixed penalties,
    every outer iteration as well.
    """

    def __init__(self, gram: sp.spmatrix, beta1: float, beta2: float,
                 prox_weight: float):
        if beta1 <= 0.0 or beta2 <= 0.0 or prox_weight < 0.0:
            raise ValueError("penalties must be positive, prox_weight nonnegative")
        n = gram.shape[0]
        self.matrix = (beta2 * gram + (prox_weight + beta1) * sp.identity(n)).tocsr()
        self._direct = n <= DIRECT_SOLVE_MAX_VERTICES
        if self._direct:
            try:
                self._lu = spla.splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SingularSystem(str(exc)) from exc
            self._precond = None
        else:
            self._lu = None
            diag = self.matrix.diagonal()
            if np.any(diag <= 0.0):
                raise SingularSystem("nonpositive diagonal in SPD system")
            self._precond = sp.diags(1.0 / diag)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _cg_compat(matrix, rhs, rtol, maxiter, M):
    try:
        return spla.cg(matrix, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, M=M)
    except TypeError:  # scipy < 1.12 spells the tolerance 'tol'
        return spla.cg(matrix, rhs, tol=rtol, atol=0.0, maxiter=maxiter, M=M)


def solve_normal_equation(
    system: NormalEquationSystem, rhs: np.ndarray, config: SolverConfig
) -> np.ndarray:
    """Solve the vertex system for one or several right-hand-side columns."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != system.n:
        raise DimensionMismatch(f"rhs has {rhs.shape[0]} rows for n={system.n}")
    if system._lu is not None:
        return system._lu.solve(rhs)
    cols = rhs[:, None] if rhs.ndim == 1 else rhs
    out = np.empty_like(cols)
    for j in range(cols.shape[1]):
        x, info = _cg_compat(
            system.matrix, cols[:, j], rtol=config.cg_tol,
            maxiter=config.cg_max_iter, M=system._precond,
        )
        if info > 0:
            raise IterationLimitExceeded(
                f"CG stopped after {config.cg_max_iter} iterations"
            )
        if info < 0:
            raise SingularSystem("CG reported an invalid system")
        out[:, j] = x
    return out[:, 0] if rhs.ndim == 1 else out


def _solve_subproblem(
    f2: np.ndarray,
    u_ref: np.ndarray,
    support: SupportSet,
    w: np.ndarray,
    op: GradientOperator,
    prox_weight: float,
    config: SolverConfig,
    system: NormalEquationSystem,
):
    """Run the inner ADMM loop on raw (n_vertices, channels) arrays.

    Returns (values, iterations, converged).  Off-support entries of the
    result are overwritten with the observed data exactly, so the pinning
    constraint holds bit-for-bit.
    """
    n_vert, channels = f2.shape
    if support.total != f2.size:
        raise DimensionMismatch("support set sized for a different image")
    if w.shape != (len(support),):
        raise DimensionMismatch("one weight per support index required")

    smask = support.mask().reshape(n_vert, channels)
    pinned = ~smask
    if len(support) == 0:
        return f2.copy(), 0, True

    beta1, beta2 = config.beta1, config.beta2
    y_threshold = config.lam * w / beta1
    z_threshold = 1.0 / beta2
    f_sup = f2[smask]

    v = u_ref.copy()
    eta = np.zeros_like(v)
    mu = np.zeros((op.n_triangles, 3, channels))
    ybar = np.zeros_like(v)
    grad_v = gradient.apply(op, v)
    scale = np.sqrt(f2.size)

    for t in range(config.inner_max_iter):
        y = shrink_1d(v[smask] - f_sup + eta[smask] / beta1, y_threshold)
        z = _shrink_groups(grad_v + mu / beta2, z_threshold)

        ybar[smask] = y
        rhs = (
            gradient.apply_adjoint(op, beta2 * z - mu, op.tri_areas)
            + beta1 * (ybar + f2)
            - eta
            + prox_weight * u_ref
        )
        v = solve_normal_equation(system, rhs, config)
        if not np.all(np.isfinite(v)):
            raise NonFiniteIterate("ADMM produced non-finite vertex values")
        grad_v = gradient.apply(op, v)

        eta = eta + beta1 * (v - f2 - ybar)
        mu = mu + beta2 * (grad_v - z)

        r_fit = np.linalg.norm(v[smask] - f_sup - y)
        r_pin = np.linalg.norm(v[pinned] - f2[pinned])
        r_grad = np.linalg.norm((grad_v - z).ravel())
        if max(r_fit, r_pin, r_grad) / scale < config.inner_tol:
            out = v.copy()
            out[pinned] = f2[pinned]
            return out, t + 1, True

    out = v.copy()
    out[pinned] = f2[pinned]
    return out, config.inner_max_iter, False


def admm_solve(
    f: MeshImage,
    u_k: MeshImage,
    support: SupportSet,
    w: np.ndarray,
    op: GradientOperator,
    config: SolverConfig,
    system: NormalEquationSystem | None = None,
):
    """Solve one proximal-linearized subproblem around ``u_k``.

    Minimizes lam * sum_j w_j |v_j - f_j| over the support, plus the
    area-weighted TV term and prox_weight/2 * ||v - u_k||^2, subject to
    v_j = f_j off the support.  Returns (image, inner_iterations, converged);
    a False flag means the residual rule was not met within inner_max_iter.
    """
    if f.values.shape != u_k.values.shape:
        raise DimensionMismatch("f and u_k must have identical shapes")
    if f.vertex_count != op.n_vertices:
        raise DimensionMismatch("image and operator vertex counts differ")
    w = np.asarray(w, dtype=np.float64)
    if system is None:
        system = NormalEquationSystem(
            assemble_gram(op), config.beta1, config.beta2, config.prox_weight
        )
    values, iters, converged = _solve_subproblem(
        f.values, u_k.values, support, w, op, config.prox_weight, config, system
    )
    return MeshImage(values), iters, converged


def _l1tv_solve_full(
    f: MeshImage,
    op: GradientOperator,
    config: SolverConfig,
    u0: MeshImage | None = None,
    system: NormalEquationSystem | None = None,
):
    """L1-TV solve returning (image, inner_iterations, converged)."""
    if f.vertex_count != op.n_vertices:
        raise DimensionMismatch("image and operator vertex counts differ")
    start = f if u0 is None else u0
    if start.values.shape != f.values.shape:
        raise DimensionMismatch("u0 and f must have identical shapes")
    support = SupportSet.full(f.values.size, f.channel_count)
    w = np.ones(len(support))
    if system is None:
        system = NormalEquationSystem(assemble_gram(op), config.beta1,
                                      config.beta2, 0.0)
    values, iters, converged = _solve_subproblem(
        f.values, start.values, support, w, op, 0.0, config, system
    )
    return MeshImage(values), iters, converged


def solve_l1tv(
    f: MeshImage,
    op: GradientOperator,
    config: SolverConfig,
    u0: MeshImage | None = None,
    system: NormalEquationSystem | None = None,
) -> MeshImage:
    """Minimize lam * ||u - f||_1 + TV(u) by ADMM.

    Reuses the subproblem machinery with full support, unit weights, and no
    proximal term.  This is the convex warm start for the nonconvex solver.
    """
    image, _, _ = _l1tv_solve_full(f, op, config, u0=u0, system=system)
    return image
