import os
import struct

import numpy as np
import pytest
from scipy import stats

from ldm.datasets import (
    DENSE_MAGIC,
    gen_hypersphere,
    gen_swiss_roll,
    load_any,
    load_dense,
    load_idx,
    read_idx,
    save_csv,
    save_dense,
    write_idx,
)
from ldm.errors import FormatError, InvalidArgumentError

MNIST = os.environ.get("LDM_MNIST_IMAGES")
COIL = os.environ.get("LDM_COIL20_DENSE")


# generators -------------------------------------------------------------------


def test_swiss_roll_parametric_identity():
    ds = gen_swiss_roll(500, noise=0.0, seed=1)
    x, z, t = ds.data[:, 0], ds.data[:, 2], ds.labels
    np.testing.assert_allclose(x**2 + z**2, t**2, rtol=0, atol=1e-9)
    assert ds.data.shape == (500, 3)
    assert np.all((ds.data[:, 1] >= 0) & (ds.data[:, 1] <= 21))


def test_swiss_roll_label_range():
    t = gen_swiss_roll(1000, seed=2).labels
    assert t.min() >= 1.5 * np.pi and t.max() <= 4.5 * np.pi


def test_swiss_roll_seeds():
    a, b = gen_swiss_roll(2000, 0.1, seed=3), gen_swiss_roll(2000, 0.1, seed=4)
    assert not np.array_equal(a.data, b.data)
    assert stats.ks_2samp(a.labels, b.labels).statistic < 0.1
    assert np.array_equal(a.data, gen_swiss_roll(2000, 0.1, seed=3).data)


def test_swiss_roll_validation():
    with pytest.raises(InvalidArgumentError):
        gen_swiss_roll(0)
    with pytest.raises(InvalidArgumentError):
        gen_swiss_roll(5, noise=-1)


def test_hypersphere_unit_norms():
    ds = gen_hypersphere(300, 7, seed=5)
    np.testing.assert_allclose(np.linalg.norm(ds.data, axis=1), 1.0, rtol=0, atol=1e-12)
    assert ds.labels is None


def test_hypersphere_radial_noise():
    r = np.linalg.norm(gen_hypersphere(4000, 5, radial_noise=0.05, seed=6).data, axis=1)
    assert abs(r.mean() - 1) < 0.01
    assert abs(r.std() - 0.05) < 0.01


def test_hypersphere_circle_uniform():
    X = gen_hypersphere(20000, 2, seed=7).data
    angles = (np.arctan2(X[:, 1], X[:, 0]) + np.pi) / (2 * np.pi)
    assert stats.kstest(angles, "uniform").statistic < 0.05


@pytest.mark.parametrize("n", [100, 1000, 5000])
def test_hypersphere_mean_concentrates(n):
    X = gen_hypersphere(n, 10, seed=n).data
    assert np.linalg.norm(X.mean(axis=0)) <= 4 / np.sqrt(n)


@pytest.mark.parametrize("D", [5, 20])
def test_hypersphere_spectrum_flat(D):
    X = gen_hypersphere(50 * D, D, seed=8).data
    w = np.linalg.eigvalsh(np.cov(X.T))[::-1][:D]
    assert w.min() > 0
    assert w.max() / w.min() <= 3


def test_hypersphere_validation():
    with pytest.raises(InvalidArgumentError):
        gen_hypersphere(10, 1)
    with pytest.raises(InvalidArgumentError):
        gen_hypersphere(10, 3, radial_noise=-0.1)


# IDX -------------------------------------------------------------------------


@pytest.fixture
def idx_pair(tmp_path):
    rng = np.random.default_rng(9)
    images = rng.integers(0, 256, (2, 28, 28), dtype=np.uint8)
    labels = np.array([3, 7], dtype=np.uint8)
    img_path = tmp_path / "train-images-idx3-ubyte"
    write_idx(img_path, images)
    write_idx(tmp_path / "train-labels-idx1-ubyte", labels)
    return img_path, images, labels


def test_idx_header_layout(idx_pair):
    path, images, _ = idx_pair
    raw = path.read_bytes()
    assert struct.unpack(">I", raw[:4])[0] == 0x00000803
    assert struct.unpack(">3I", raw[4:16]) == (2, 28, 28)
    assert len(raw) == 16 + 2 * 784
    labels_raw = (path.parent / "train-labels-idx1-ubyte").read_bytes()
    assert struct.unpack(">I", labels_raw[:4])[0] == 0x00000801


def test_idx_roundtrip_byte_exact(idx_pair, tmp_path):
    path, images, _ = idx_pair
    arr = read_idx(path)
    np.testing.assert_array_equal(arr, images)
    write_idx(tmp_path / "copy", arr)
    assert (tmp_path / "copy").read_bytes() == path.read_bytes()


def test_load_idx_scaling_and_labels(idx_pair):
    path, images, labels = idx_pair
    ds = load_idx(path)
    assert ds.data.shape == (2, 784)
    np.testing.assert_array_equal(ds.data, images.reshape(2, -1) / 255.0)
    np.testing.assert_array_equal(ds.labels, labels)
    assert 0.0 <= ds.data.min() and ds.data.max() <= 1.0


def test_load_idx_limit_prefix(tmp_path):
    images = np.arange(10 * 4, dtype=np.uint8).reshape(10, 2, 2)
    write_idx(tmp_path / "x-images-idx3-ubyte", images)
    ds = load_idx(tmp_path / "x-images-idx3-ubyte", limit=5)
    np.testing.assert_array_equal(ds.data, images[:5].reshape(5, -1) / 255.0)
    assert ds.labels is None


def test_load_idx_gzip(tmp_path):
    images = np.arange(3 * 4, dtype=np.uint8).reshape(3, 2, 2)
    write_idx(tmp_path / "a-images-idx3-ubyte.gz", images)
    np.testing.assert_array_equal(read_idx(tmp_path / "a-images-idx3-ubyte.gz"), images)


def test_idx_bad_magic(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(b"\x01\x02\x08\x03" + b"\x00" * 20)
    with pytest.raises(FormatError, match="offset 0"):
        read_idx(p)


def test_idx_truncated_reports_offset(idx_pair, tmp_path):
    path, _, _ = idx_pair
    p = tmp_path / "trunc"
    p.write_bytes(path.read_bytes()[:100])
    with pytest.raises(FormatError, match="offset 100"):
        read_idx(p)


@pytest.mark.skipif(not MNIST, reason="set LDM_MNIST_IMAGES to an MNIST train images file")
def test_mnist_train_shape():
    ds = load_idx(MNIST)
    assert ds.data.shape == (60000, 784)


# dense / CSV -----------------------------------------------------------------


def test_csv_basic(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1,2\n3,4\n5,6")
    ds = load_dense(p)
    np.testing.assert_array_equal(ds.data, [[1, 2], [3, 4], [5, 6]])
    assert ds.labels is None


def test_csv_labels(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("1,2,0\n3,4,1\n")
    ds = load_dense(p, has_labels=True)
    np.testing.assert_array_equal(ds.data, [[1, 2], [3, 4]])
    np.testing.assert_array_equal(ds.labels, [0, 1])


@pytest.mark.parametrize(
    "text, match",
    [("1,2\n3\n", "row 1 has 1 columns"), ("1,2\n3,x\n", "row 1, column 1"), ("1,nan\n", "row 0, column 1")],
)
def test_csv_errors(tmp_path, text, match):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(FormatError, match=match):
        load_dense(p)


def test_csv_write_read_exact(tmp_path):
    X = np.random.default_rng(10).standard_normal((7, 3))
    save_csv(tmp_path / "x.csv", X)
    assert np.array_equal(load_dense(tmp_path / "x.csv").data, X)


def test_dense_roundtrip_bit_identical(tmp_path):
    X = np.random.default_rng(11).standard_normal((13, 5))
    y = np.arange(13.0)
    save_dense(tmp_path / "x.bin", X)
    save_dense(tmp_path / "xy.bin", X, y)
    a, b = load_dense(tmp_path / "x.bin"), load_dense(tmp_path / "xy.bin")
    assert a.data.tobytes() == X.tobytes() and a.labels is None
    assert b.data.tobytes() == X.tobytes()
    np.testing.assert_array_equal(b.labels, y)


def test_dense_layout(tmp_path):
    save_dense(tmp_path / "x.bin", [[1.0, 2.0]], [9.0])
    raw = (tmp_path / "x.bin").read_bytes()
    assert raw[:8] == DENSE_MAGIC
    assert struct.unpack("<QQ", raw[8:24]) == (1, 2)
    assert struct.unpack("<2d", raw[24:40]) == (1.0, 2.0)
    assert raw[40] == 1 and struct.unpack("<d", raw[41:]) == (9.0,)


def test_dense_errors(tmp_path):
    save_dense(tmp_path / "x.bin", np.ones((4, 4)))
    raw = (tmp_path / "x.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[:-8])
    with pytest.raises(FormatError, match="truncated"):
        load_dense(tmp_path / "t.bin")
    (tmp_path / "g.bin").write_bytes(raw + b"\x07junk")
    with pytest.raises(FormatError, match="trailing"):
        load_dense(tmp_path / "g.bin")
    save_dense(tmp_path / "n.bin", [[1.0, np.nan]])
    with pytest.raises(FormatError, match="row 0, column 1"):
        load_dense(tmp_path / "n.bin")


def test_load_any_dispatch(tmp_path, idx_pair):
    path, _, _ = idx_pair
    assert load_any(path).data.shape == (2, 784)
    save_dense(tmp_path / "x.bin", np.ones((6, 2)))
    assert load_any(tmp_path / "x.bin", limit=4).data.shape == (4, 2)
    (tmp_path / "x.csv").write_text("1,2\n3,4\n")
    assert load_any(tmp_path / "x.csv").data.shape == (2, 2)


@pytest.mark.skipif(not COIL, reason="set LDM_COIL20_DENSE to a pre-exported COIL-20 dense file")
def test_coil20_shape():
    assert load_dense(COIL).data.shape == (1440, 16384)
