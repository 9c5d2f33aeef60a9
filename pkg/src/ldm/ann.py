"""Exact k-nearest neighbors and the recall@k metric."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ldm.errors import InvalidArgumentError
from ldm.linalg import as_data_matrix, row_norms_sq

BLOCK_ROWS = 512
# Cap on floats held by one block's candidate-difference tensor.
BLOCK_FLOATS = 8_000_000


@dataclass(frozen=True, eq=False)
class NeighborList:
    """Row ``i`` holds the indices of the ``k`` neighbors of point ``i``."""

    indices: np.ndarray

    def __post_init__(self):
        if self.indices.ndim != 2:
            raise InvalidArgumentError(f"indices must be 2-D, got shape {self.indices.shape}")

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def validate(self):
        """Raise if any row contains itself, a duplicate, or an out-of-range index."""
        idx = self.indices
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise InvalidArgumentError("neighbor index out of range")
        if np.any(idx == np.arange(self.n)[:, None]):
            raise InvalidArgumentError("a point lists itself as a neighbor")
        s = np.sort(idx, axis=1)
        if np.any(s[:, 1:] == s[:, :-1]):
            raise InvalidArgumentError("duplicate neighbor within a row")

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            csv.writer(f, lineterminator="\n").writerows(self.indices.tolist())

    @classmethod
    def from_csv(cls, path):
        return cls(np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2))


def exact_knn(R, k, block_rows=BLOCK_ROWS) -> NeighborList:
    """Brute-force kNN under Euclidean distance, excluding the point itself.

    Rows come out ascending by distance with ties broken by lower index.
    Candidates are shortlisted with the law of cosines and then re-ranked on
    directly computed squared differences, so the ordering does not depend
    on cancellation error in ``|a|^2 + |b|^2 - 2 a.b``.
    """
    R = as_data_matrix(R)
    n = R.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidArgumentError(f"need 1 <= k <= N-1 = {n - 1}, got k={k}")
    n_cand = min(n - 1, k + max(8, k))
    r2 = row_norms_sq(R)
    block_rows = max(1, min(block_rows, BLOCK_FLOATS // (n_cand * R.shape[1] + n)))
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        rows = np.arange(start, stop)
        approx = r2[rows, None] + r2[None, :] - 2.0 * (R[rows] @ R.T)
        approx[np.arange(stop - start), rows] = np.inf
        if n_cand < n - 1:
            cand = np.argpartition(approx, n_cand - 1, axis=1)[:, :n_cand]
        else:
            cand = np.argsort(approx, axis=1, kind="stable")[:, :n_cand]
        diff = R[cand] - R[rows, None, :]
        exact = np.einsum("bcd,bcd->bc", diff, diff)
        # Sort by (distance, index): index first, then a stable sort on distance.
        by_index = np.argsort(cand, axis=1, kind="stable")
        cand = np.take_along_axis(cand, by_index, axis=1)
        exact = np.take_along_axis(exact, by_index, axis=1)
        order = np.argsort(exact, axis=1, kind="stable")[:, :k]
        out[start:stop] = np.take_along_axis(cand, order, axis=1)
    return NeighborList(out)


def knn_in_embedding(embedding, k) -> NeighborList:
    """Exact kNN among the latent coordinates of an embedding."""
    coords = embedding.coords if hasattr(embedding, "coords") else embedding
    return exact_knn(coords, k)


def recall_at_k(A: NeighborList, B: NeighborList) -> float:
    """Mean over points of ``|A_i & B_i| / k``."""
    a, b = np.asarray(A.indices), np.asarray(B.indices)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"neighbor lists differ in shape: {a.shape} vs {b.shape}")
    n, k = a.shape
    if n == 0 or k == 0:
        raise InvalidArgumentError("neighbor lists are empty")
    # Rows have no duplicates, so counting equal pairs counts the intersection.
    hits = (a[:, :, None] == b[:, None, :]).sum(axis=(1, 2))
    return float(hits.sum() / (n * k))
