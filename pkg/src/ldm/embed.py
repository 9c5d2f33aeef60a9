"""Fitting PCA and LDM embeddings, plus dense diffusion-process references."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from ldm.errors import ConvergenceError, DegenerateNormalizationError, InvalidArgumentError
from ldm.kernels import VARIANTS, Variant, ldm_state, pca_operator
from ldm.linalg import DEFAULT_TOL, as_data_matrix, lanczos_symmetric

METHODS = ("pca", "ldm", "ldm-a")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Latent coordinates (one row per sample) and their eigenvalues."""

    coords: np.ndarray
    eigenvalues: np.ndarray
    method: str
    epsilon: float | None = None
    diffusion_time: float = 0.0
    dropped_trivial: bool = False
    degrees: np.ndarray | None = field(default=None, repr=False)
    iterations: int = 0

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != len(self.eigenvalues):
            raise InvalidArgumentError(
                f"coords shape {self.coords.shape} does not match "
                f"{len(self.eigenvalues)} eigenvalues"
            )

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


def fit_pca(R, d, seed=0, center=True, tol=DEFAULT_TOL, max_iter=None) -> Embedding:
    """Top-``d`` principal components as ``sqrt(lambda_x) v_ix``.

    With this scaling the embedding's pairwise distances are those of the
    centered data projected onto the leading principal subspace, times
    ``1 / sqrt(N - 1)``.
    """
    R = as_data_matrix(R)
    n, D = R.shape
    if not 1 <= d <= min(n - 1, D):
        raise InvalidArgumentError(f"need 1 <= d <= min(N-1, D) = {min(n - 1, D)}, got {d}")
    res = lanczos_symmetric(pca_operator(R, center), d, max_iter=max_iter, tol=tol, seed=seed)
    lam = res.eigenvalues
    coords = res.eigenvectors * np.sqrt(np.maximum(lam, 0.0))
    return Embedding(coords, lam, "pca", iterations=res.iterations)


def _eig_power(lam, t):
    if float(t).is_integer():
        return lam ** int(t)
    # Non-integer times on negative eigenvalues keep the sign; only squared
    # coordinates enter distances.
    return np.sign(lam) * np.abs(lam) ** t


def fit_ldm(
    R,
    d,
    variant: Variant = "symmetric",
    t=1.0,
    eps=None,
    drop_trivial=True,
    seed=0,
    center=False,
    raw_eigvecs=False,
    tol=DEFAULT_TOL,
    max_iter=None,
) -> Embedding:
    """Linearized diffusion map embedding.

    Solves the symmetric LDM operator for its leading eigenpairs ``phi`` and
    converts them to random-walk eigenvectors ``psi = phi / sqrt(pi)``, where
    ``pi = k / sum(k)`` is the stationary distribution. ``psi`` is the same
    for both variants because the asymmetric operator is similar to the
    symmetric one; ``variant`` is recorded on the result. Coordinates are
    ``lambda_x**t psi_ix`` so that, over the full spectrum, Euclidean distances
    equal diffusion distances at time ``t``.

    ``eps=None`` uses ``4 R_max^2``. With ``drop_trivial`` the eigenvalue-1
    pair (constant ``psi``) is solved for and discarded, so ``d + 1`` pairs
    are computed. ``raw_eigvecs`` returns ``phi`` unconverted and unscaled.
    """
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if t < 0:
        raise InvalidArgumentError(f"diffusion time must be >= 0, got {t}")
    R = as_data_matrix(R)
    n = R.shape[0]
    n_pairs = d + 1 if drop_trivial else d
    if d < 1 or n_pairs > n:
        top = n - 1 if drop_trivial else n
        raise InvalidArgumentError(f"need 1 <= d <= {top} for N={n}, got {d}")

    state = ldm_state(R, eps, "symmetric", center)
    res = lanczos_symmetric(state.operator(), n_pairs, max_iter=max_iter, tol=tol, seed=seed)
    lam, phi = res.eigenvalues, res.eigenvectors
    if drop_trivial:
        sqrt_deg = np.sqrt(state.degrees)
        trivial = int(np.argmax(np.abs(sqrt_deg @ phi)))
        keep = np.arange(n_pairs) != trivial
        lam, phi = lam[keep], phi[:, keep]

    method = "ldm" if variant == "symmetric" else "ldm-a"
    if raw_eigvecs:
        coords = phi.copy()
    else:
        pi = state.degrees / state.degrees.sum()
        psi = phi / np.sqrt(pi)[:, None]
        coords = psi * _eig_power(lam, t)
    return Embedding(
        coords,
        lam,
        method,
        epsilon=state.epsilon,
        diffusion_time=float(t),
        dropped_trivial=bool(drop_trivial),
        degrees=state.degrees,
        iterations=res.iterations,
    )


def fit(R, method, d, **kw) -> Embedding:
    """Dispatch on ``method`` in ``{"pca", "ldm", "ldm-a"}``."""
    if method == "pca":
        pca_kw = {k: v for k, v in kw.items() if k in ("seed", "tol", "max_iter")}
        return fit_pca(R, d, **pca_kw)
    if method in ("ldm", "ldm-a"):
        variant = "symmetric" if method == "ldm" else "asymmetric"
        return fit_ldm(R, d, variant=variant, **kw)
    raise InvalidArgumentError(f"method must be one of {METHODS}, got {method!r}")


def transition_matrix_dense(k) -> np.ndarray:
    """Row-normalize a nonnegative kernel into a random-walk matrix."""
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidArgumentError(f"kernel must be square, got shape {k.shape}")
    if np.any(k < 0):
        raise InvalidArgumentError("kernel has negative entries")
    rows = k.sum(axis=1)
    zero = np.flatnonzero(rows <= 0)
    if zero.size:
        raise DegenerateNormalizationError(f"row {zero[0]} of the kernel sums to zero", int(zero[0]))
    return k / rows[:, None]


def stationary_distribution(P, kernel=None, tol=1e-12, max_iter=100_000) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix.

    If the symmetric ``kernel`` that produced ``P`` is given, the reversible
    closed form ``k_i / sum(k)`` is used. Otherwise a lazy power iteration
    runs from the uniform distribution.
    """
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    if kernel is not None:
        deg = np.asarray(kernel, dtype=np.float64).sum(axis=1)
        return deg / deg.sum()

    n_comp, _ = connected_components(P > 0, directed=True, connection="strong")
    if n_comp > 1:
        raise ConvergenceError(f"chain is reducible ({n_comp} communicating classes)")
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = 0.5 * (pi + pi @ P)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= tol:
            return nxt
        pi = nxt
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def diffusion_distance_oracle(P, pi, t) -> np.ndarray:
    """``D_t(i, j) = sqrt(sum_k (P^t_ik - P^t_jk)^2 / pi_k)`` by brute force.

    O(N^3 t); meant for checking embeddings on small N.
    """
    P = np.asarray(P, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    if int(t) != t or t < 1:
        raise InvalidArgumentError(f"t must be a positive integer, got {t}")
    if np.any(pi <= 0):
        raise InvalidArgumentError("stationary distribution must be strictly positive")
    W = np.linalg.matrix_power(P, int(t)) / np.sqrt(pi)
    n = W.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        out[i] = np.sqrt(((W[i] - W) ** 2).sum(axis=1))
    return out
