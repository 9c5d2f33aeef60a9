"""Kernel matrices (dense, for checking) and the operators used for fitting.

The dense builders materialize N x N matrices and exist to pin down the
algebra on small inputs. The operator builders touch only the N x D data and
a handful of length-N vectors, so one matvec costs O(N D).

The linearized RBF kernel is the first-order truncation

    k_ij = 1 - D2_ij / eps
         = (1 - |r_i|^2 / eps) - |r_j|^2 / eps + (2 / eps) r_i . r_j

and its row sums (degrees) normalize it into a diffusion operator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ldm.errors import DegenerateNormalizationError, InvalidArgumentError
from ldm.linalg import MatrixFreeOperator, as_data_matrix, pairwise_sq_dist, row_norms_sq

Variant = Literal["symmetric", "asymmetric"]
VARIANTS = ("symmetric", "asymmetric")

DEGREE_FLOOR = 1e-12


class PositivityWarning(UserWarning):
    """Epsilon is below 4 R_max^2, so kernel entries may be negative."""


@dataclass(frozen=True)
class KernelParams:
    epsilon: float
    center: bool = False

    def __post_init__(self):
        _check_eps(self.epsilon)


def _check_eps(eps):
    if not (np.isfinite(eps) and eps > 0):
        raise InvalidArgumentError(f"epsilon must be a positive finite number, got {eps}")


def default_epsilon(R) -> float:
    """``4 * max_i |r_i|^2``, an upper bound on every squared distance.

    Falls back to 1.0 when every row is zero.
    """
    r2max = float(row_norms_sq(R).max())
    return 4.0 * r2max if r2max > 0 else 1.0


def rbf_kernel_dense(R, eps) -> np.ndarray:
    _check_eps(eps)
    return np.exp(-pairwise_sq_dist(R) / eps)


def linearized_rbf_dense(R, eps) -> np.ndarray:
    _check_eps(eps)
    return 1.0 - pairwise_sq_dist(R) / eps


def double_center(k) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidArgumentError(f"kernel must be square, got shape {k.shape}")
    row = k.mean(axis=1, keepdims=True)
    col = k.mean(axis=0, keepdims=True)
    return k - row - col + k.mean()


def mds_kernel_dense(R) -> np.ndarray:
    """Classical MDS Gram matrix ``-1/2 H D2 H``."""
    return -0.5 * double_center(pairwise_sq_dist(R))


def centered(R) -> np.ndarray:
    R = as_data_matrix(R)
    return R - R.mean(axis=0)


def pca_operator(R, center=True) -> MatrixFreeOperator:
    """Covariance-kernel operator ``v -> C (C^T v) / (N - 1)``."""
    R = as_data_matrix(R)
    n = R.shape[0]
    if n < 2:
        raise InvalidArgumentError("PCA needs at least two samples (Bessel divisor N - 1)")
    C = centered(R) if center else R
    scale = 1.0 / (n - 1)

    def matvec(v):
        return (C @ (C.T @ v)) * scale

    return MatrixFreeOperator(n, matvec, True, "pca")


def _linearized_matvec(R, r2, eps, v):
    # k @ v without forming k; v may be (N,) or (N, m).
    s = v.sum(axis=0)
    rv = r2 @ v
    out = np.multiply.outer(1.0 - r2 / eps, s) - rv / eps
    out += (2.0 / eps) * (R @ (R.T @ v))
    return out


def ldm_degrees(R, eps) -> np.ndarray:
    """Row sums of the linearized RBF kernel, in O(N D)."""
    _check_eps(eps)
    R = as_data_matrix(R)
    r2 = row_norms_sq(R)
    n = R.shape[0]
    deg = n * (1.0 - r2 / eps) - r2.sum() / eps + (2.0 / eps) * (R @ R.sum(axis=0))
    bad = np.flatnonzero(deg <= DEGREE_FLOOR)
    if bad.size:
        i = int(bad[0])
        raise DegenerateNormalizationError(
            f"degree of point {i} is {deg[i]:.3g} (<= {DEGREE_FLOOR:g}); "
            "increase epsilon or check the data",
            index=i,
        )
    return deg


@dataclass(frozen=True, eq=False)
class LdmOperatorState:
    """Everything the LDM matvec needs: data, squared norms, degrees, eps.

    ``norm`` is ``degrees**-0.5`` for the symmetric variant and
    ``degrees**-1`` for the asymmetric one.
    """

    R: np.ndarray
    r_sq: np.ndarray
    degrees: np.ndarray
    norm: np.ndarray
    epsilon: float
    variant: Variant

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    def kernel_matvec(self, v):
        return _linearized_matvec(self.R, self.r_sq, self.epsilon, v)

    def matvec(self, v):
        nrm = self.norm if v.ndim == 1 else self.norm[:, None]
        if self.variant == "symmetric":
            return nrm * self.kernel_matvec(nrm * v)
        return nrm * self.kernel_matvec(v)

    def operator(self) -> MatrixFreeOperator:
        sym = self.variant == "symmetric"
        return MatrixFreeOperator(self.dim, self.matvec, sym, "ldm" if sym else "ldm-a")


def ldm_state(R, eps=None, variant: Variant = "symmetric", center=False) -> LdmOperatorState:
    """Build the parameters of an LDM operator.

    ``eps=None`` selects :func:`default_epsilon` of the (optionally centered)
    data. Values below that bound only warn: the operator is still a valid
    linear map, but entries of the kernel may go negative.
    """
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"variant must be one of {VARIANTS}, got {variant!r}")
    R = centered(R) if center else as_data_matrix(R)
    bound = default_epsilon(R)
    if eps is None:
        eps = bound
    _check_eps(eps)
    if eps < bound:
        warnings.warn(
            f"epsilon={eps:g} is below 4 R_max^2 = {bound:g}; kernel entries may be "
            "negative and the random-walk reading no longer holds",
            PositivityWarning,
            stacklevel=2,
        )
    deg = ldm_degrees(R, eps)
    norm = deg**-0.5 if variant == "symmetric" else 1.0 / deg
    return LdmOperatorState(R, row_norms_sq(R), deg, norm, float(eps), variant)


def ldm_operator(R, eps=None, variant: Variant = "symmetric", center=False) -> MatrixFreeOperator:
    """Matrix-free LDM operator.

    symmetric: ``diag(k)^-1/2 k diag(k)^-1/2``; asymmetric: ``diag(k)^-1 k``,
    with ``k`` the linearized RBF kernel and ``k_i`` its row sums.
    """
    return ldm_state(R, eps, variant, center).operator()
