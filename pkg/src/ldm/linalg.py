"""Dense and matrix-free linear algebra.

Everything downstream works on plain ``float64`` numpy arrays. A
:class:`MatrixFreeOperator` wraps a matvec closure so that an N x N kernel
never has to be materialized, and :func:`lanczos_symmetric` extracts its
leading eigenpairs from repeated matvecs alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ldm.errors import ContractViolationError, ConvergenceError, InvalidArgumentError

DEFAULT_TOL = 1e-10


def as_data_matrix(R, name="R") -> np.ndarray:
    """Validate and convert ``R`` to a finite, nonempty 2-D float64 array."""
    R = np.asarray(R, dtype=np.float64)
    if R.ndim == 1:
        R = R[:, None]
    if R.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got shape {R.shape}")
    if R.size == 0:
        raise InvalidArgumentError(f"{name} is empty (shape {R.shape})")
    if not np.all(np.isfinite(R)):
        raise InvalidArgumentError(f"{name} contains NaN or Inf")
    return np.ascontiguousarray(R)


def row_norms_sq(R) -> np.ndarray:
    """Squared Euclidean norm of every row."""
    R = as_data_matrix(R)
    return np.einsum("ij,ij->i", R, R)


def pairwise_sq_dist(R, Y=None) -> np.ndarray:
    """Squared Euclidean distances via the law of cosines.

    ``|r_i|^2 + |y_j|^2 - 2 r_i . y_j``, clamped at zero. With ``Y`` omitted
    the result is the symmetric N x N matrix over the rows of ``R`` with an
    exactly zero diagonal.
    """
    R = as_data_matrix(R)
    if Y is None:
        r2 = row_norms_sq(R)
        G = R @ R.T
        D2 = r2[:, None] + r2[None, :] - 2.0 * G
        D2 = 0.5 * (D2 + D2.T)
        np.fill_diagonal(D2, 0.0)
    else:
        Y = as_data_matrix(Y, "Y")
        if Y.shape[1] != R.shape[1]:
            raise InvalidArgumentError(
                f"feature mismatch: R has {R.shape[1]} columns, Y has {Y.shape[1]}"
            )
        D2 = row_norms_sq(R)[:, None] + row_norms_sq(Y)[None, :] - 2.0 * (R @ Y.T)
    np.maximum(D2, 0.0, out=D2)
    return D2


@dataclass(frozen=True)
class MatrixFreeOperator:
    """A linear map on R^N exposed only through its action.

    ``matvec`` must accept either an ``(N,)`` vector or an ``(N, m)`` block of
    column vectors and return an array of the same shape.
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    is_symmetric: bool = True
    name: str = "operator"

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.dim or v.ndim not in (1, 2):
            raise InvalidArgumentError(
                f"{self.name}: expected leading dimension {self.dim}, got shape {v.shape}"
            )
        return self.matvec(v)

    def __matmul__(self, v):
        return self.apply(v)

    def to_dense(self) -> np.ndarray:
        """Materialize the operator column by column. Test/debug use only."""
        return self.apply(np.eye(self.dim))

    def as_scipy(self):
        from scipy.sparse.linalg import LinearOperator

        return LinearOperator(
            (self.dim, self.dim),
            matvec=self.apply,
            matmat=self.apply,
            rmatvec=self.apply if self.is_symmetric else None,
            dtype=np.float64,
        )


def dense_operator(K, name="dense") -> MatrixFreeOperator:
    """Wrap an explicit square matrix as an operator."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError(f"operator matrix must be square, got {K.shape}")
    symmetric = bool(np.allclose(K, K.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(K).max())))
    return MatrixFreeOperator(K.shape[0], lambda v: K @ v, symmetric, name)


def linearity_error(op: MatrixFreeOperator, n_probes=5, seed=0) -> float:
    """Largest relative deviation of ``op(a u + b v)`` from ``a op(u) + b op(v)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        u, v = rng.standard_normal((2, op.dim))
        a, b = rng.standard_normal(2)
        lhs = op.apply(a * u + b * v)
        rhs = a * op.apply(u) + b * op.apply(v)
        scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), np.finfo(float).tiny)
        worst = max(worst, np.linalg.norm(lhs - rhs) / scale)
    return worst


def symmetry_error(op: MatrixFreeOperator, n_probes=5, seed=0) -> float:
    """Largest relative gap between <u, op v> and <op u, v> over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        u, v = rng.standard_normal((2, op.dim))
        Au, Av = op.apply(u), op.apply(v)
        scale = max(np.linalg.norm(u) * np.linalg.norm(Av), np.finfo(float).tiny)
        worst = max(worst, abs(u @ Av - Au @ v) / scale)
    return worst


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs sorted by descending eigenvalue; eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray | None = None
    iterations: int = 0


def _sort_and_fix_signs(w, V):
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    # Make the largest-magnitude entry of each column positive.
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return w, V * signs


def dense_eig_symmetric(K, sym_tol=1e-10) -> EigenResult:
    """Full spectrum of a dense symmetric matrix, descending."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgumentError(f"matrix must be square, got shape {K.shape}")
    scale = max(1.0, float(np.abs(K).max(initial=0.0)))
    asym = float(np.abs(K - K.T).max(initial=0.0))
    if asym > sym_tol * scale:
        raise InvalidArgumentError(f"matrix is not symmetric (max |K - K^T| = {asym:.3g})")
    w, V = np.linalg.eigh(0.5 * (K + K.T))
    w, V = _sort_and_fix_signs(w, V)
    return EigenResult(w, V)


def lanczos_symmetric(
    op: MatrixFreeOperator,
    d: int,
    max_iter: int | None = None,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> EigenResult:
    """Top-``d`` eigenpairs (by algebraic value) of a symmetric operator.

    Lanczos with full reorthogonalization. When the Krylov space becomes
    invariant the recurrence restarts from a fresh random vector orthogonal
    to the current basis, so repeated eigenvalues and null spaces are still
    reachable. A pair is accepted once its residual
    ``||A v - lambda v||`` is at most ``tol * max(1, |lambda|)``; the Ritz
    estimate drives iteration and the explicit residual is confirmed before
    returning.

    ``max_iter`` defaults to ``10 d + 100`` and is capped at ``op.dim``; at
    ``op.dim`` steps the basis spans the whole space and the result is exact
    up to rounding.
    """
    if not op.is_symmetric:
        raise ContractViolationError(f"{op.name} is not symmetric; Lanczos requires symmetry")
    n = op.dim
    if not 1 <= d <= n:
        raise InvalidArgumentError(f"need 1 <= d <= {n}, got d={d}")
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    if max_iter is None:
        max_iter = 10 * d + 100
    m_cap = min(int(max_iter), n)
    if m_cap < d:
        raise InvalidArgumentError(f"max_iter={max_iter} cannot produce {d} eigenpairs")

    rng = np.random.default_rng(seed)
    Q = np.empty((n, m_cap))
    alpha = np.zeros(m_cap)
    beta = np.zeros(m_cap)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    anorm = 0.0
    best_res = None
    j = 0
    while True:
        Q[:, j] = q
        w = op.apply(q)
        alpha[j] = q @ w
        basis = Q[:, : j + 1]
        # Two passes of classical Gram-Schmidt keep the basis orthogonal to
        # working precision.
        w -= basis @ (basis.T @ w)
        w -= basis @ (basis.T @ w)
        b = float(np.linalg.norm(w))
        anorm = max(anorm, abs(alpha[j]) + b + (beta[j - 1] if j else 0.0))
        j += 1
        breakdown = b <= 1e-13 * max(anorm, np.finfo(float).tiny)
        if breakdown:
            b = 0.0

        check = j >= d and (j == m_cap or breakdown or j < 50 or j % 5 == 0)
        if check:
            theta, S = eigh_tridiagonal(alpha[:j], beta[: j - 1])
            top = np.argsort(-theta, kind="stable")[:d]
            ritz_res = np.abs(b * S[j - 1, top])
            bound = tol * np.maximum(1.0, np.abs(theta[top]))
            if np.all(ritz_res <= bound) or j == m_cap:
                V = Q[:, :j] @ S[:, top]
                V /= np.linalg.norm(V, axis=0)
                lam = theta[top]
                res = np.linalg.norm(op.apply(V) - V * lam, axis=0)
                best_res = res
                if np.all(res <= bound):
                    # theta[top] is already descending, so res keeps its order.
                    lam, V = _sort_and_fix_signs(lam, V)
                    return EigenResult(lam, V, res, j)
        if j == m_cap:
            raise ConvergenceError(
                f"Lanczos did not reach tol={tol:g} for {d} pairs in {j} iterations",
                residuals=best_res,
            )

        if breakdown:
            # Invariant subspace found; continue in its orthogonal complement.
            beta[j - 1] = 0.0
            basis = Q[:, :j]
            for _ in range(5):
                q = rng.standard_normal(n)
                q -= basis @ (basis.T @ q)
                q -= basis @ (basis.T @ q)
                nq = np.linalg.norm(q)
                if nq > 1e-8:
                    break
            else:
                raise ConvergenceError("could not extend the Krylov basis", residuals=best_res)
            q /= nq
        else:
            beta[j - 1] = b
            q = w / b
