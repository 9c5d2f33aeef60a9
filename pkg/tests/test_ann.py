import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldm.ann import NeighborList, exact_knn, knn_in_embedding, recall_at_k
from ldm.embed import fit_pca
from ldm.errors import InvalidArgumentError


def full_sort_knn(R, k):
    """Independent oracle: direct distances, sort each row by (distance, index)."""
    n = len(R)
    out = []
    for i in range(n):
        d = [(float(np.sum((R[i] - R[j]) ** 2)), j) for j in range(n) if j != i]
        d.sort()
        out.append([j for _, j in d[:k]])
    return np.array(out)


def set_recall(A, B):
    k = len(A[0])
    return sum(len(set(a) & set(b)) / k for a, b in zip(A, B)) / len(A)


def test_collinear_by_hand():
    nl = exact_knn([[0.0], [1.0], [3.0]], 1)
    np.testing.assert_array_equal(nl.indices[:, 0], [1, 0, 1])


def test_duplicates_list_each_other_first():
    R = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 0.0], [1.0, 0.0]])
    nl = exact_knn(R, 2)
    assert nl.indices[0, 0] == 2 and nl.indices[2, 0] == 0


def test_ties_broken_by_lower_index():
    # Point 0 is equidistant from points 1..4.
    R = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    nl = exact_knn(R, 3)
    np.testing.assert_array_equal(nl.indices[0], [1, 2, 3])


@pytest.mark.parametrize("block_rows", [7, 512])
def test_matches_full_sort(block_rows):
    R = np.random.default_rng(0).standard_normal((50, 4))
    nl = exact_knn(R, 5, block_rows=block_rows)
    np.testing.assert_array_equal(nl.indices, full_sort_knn(R, 5))
    nl.validate()


def test_k_equal_n_minus_one():
    R = np.random.default_rng(1).standard_normal((6, 2))
    np.testing.assert_array_equal(exact_knn(R, 5).indices, full_sort_knn(R, 5))


@pytest.mark.parametrize("k", [0, 10])
def test_k_range(k):
    with pytest.raises(InvalidArgumentError):
        exact_knn(np.zeros((10, 2)), k)


def test_knn_in_embedding_isometric_case():
    R = np.random.default_rng(2).standard_normal((40, 3))
    emb = fit_pca(R, 3)
    C = R - R.mean(axis=0)
    np.testing.assert_array_equal(knn_in_embedding(emb, 6).indices, exact_knn(C, 6).indices)
    assert recall_at_k(knn_in_embedding(emb, 6), exact_knn(R, 6)) == 1.0


def test_knn_one_dimensional_projection():
    coords = np.array([[0.0], [10.0], [1.0], [3.0]])
    np.testing.assert_array_equal(knn_in_embedding(coords, 1).indices[:, 0], [2, 3, 0, 2])


def test_recall_trivial_cases():
    A = NeighborList(np.array([[1, 2], [0, 2], [0, 1]]))
    assert recall_at_k(A, A) == 1.0
    B = NeighborList(np.array([[3, 4], [3, 4], [3, 4]]))
    assert recall_at_k(A, B) == 0.0
    C = NeighborList(np.array([[2, 3], [2, 3]]))
    D = NeighborList(np.array([[2, 4], [3, 5]]))
    assert recall_at_k(C, D) == 0.5


def test_recall_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        recall_at_k(NeighborList(np.zeros((3, 2), int)), NeighborList(np.zeros((3, 3), int)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 30), st.integers(1, 4))
def test_recall_symmetric_and_matches_sets(seed, n, k):
    rng = np.random.default_rng(seed)
    A = np.array([rng.choice(n, k, replace=False) for _ in range(n)])
    B = np.array([rng.choice(n, k, replace=False) for _ in range(n)])
    a, b = NeighborList(A), NeighborList(B)
    r = recall_at_k(a, b)
    assert r == recall_at_k(b, a)
    assert 0.0 <= r <= 1.0
    assert r == pytest.approx(set_recall(A, B), abs=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rigid_motion_invariance(seed):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((30, 3))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    moved = R @ Q + rng.standard_normal(3) * 5
    assert recall_at_k(exact_knn(R, 4), exact_knn(moved, 4)) == 1.0


def test_validate_rejects_bad_lists():
    with pytest.raises(InvalidArgumentError):
        NeighborList(np.array([[0, 1], [0, 2], [0, 1]])).validate()
    with pytest.raises(InvalidArgumentError):
        NeighborList(np.array([[1, 1], [0, 2], [0, 1]])).validate()
    with pytest.raises(InvalidArgumentError):
        NeighborList(np.array([[1, 5], [0, 2], [0, 1]])).validate()


def test_csv_roundtrip(tmp_path):
    nl = exact_knn(np.random.default_rng(3).standard_normal((12, 2)), 3)
    nl.to_csv(tmp_path / "nl.csv")
    np.testing.assert_array_equal(NeighborList.from_csv(tmp_path / "nl.csv").indices, nl.indices)
    assert (tmp_path / "nl.csv").read_text().count("\n") == 12
