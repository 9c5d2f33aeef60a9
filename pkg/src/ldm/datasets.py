"""Synthetic generators and file loaders.

File formats
------------
IDX (MNIST): big-endian; magic ``0x00000803`` for images, ``0x00000801`` for
labels (two zero bytes, type code ``0x08`` = unsigned byte, number of dims),
then one 32-bit count per dim, then the payload.

Dense binary: the 8 bytes ``LDMDNSE1``, rows and cols as little-endian
uint64, ``rows * cols`` little-endian float64 row-major. An optional trailing
block starts with a one-byte marker: ``0x01`` is followed by ``rows`` float64
labels, ``0x00`` means no labels.

CSV: comma separated, no header; with ``has_labels`` the last column is
taken as labels.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ldm.errors import FormatError, InvalidArgumentError

DENSE_MAGIC = b"LDMDNSE1"
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(eq=False)
class LabeledDataset:
    data: np.ndarray
    labels: np.ndarray | None = None
    name: str = "data"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != self.data.shape[0]:
            raise InvalidArgumentError(
                f"{len(self.labels)} labels for {self.data.shape[0]} rows"
            )

    @property
    def shape(self):
        return self.data.shape


def gen_swiss_roll(n, noise=0.0, seed=0) -> LabeledDataset:
    """Points ``(t cos t, h, t sin t)`` plus isotropic Gaussian noise.

    ``t ~ U[1.5 pi, 4.5 pi]`` is returned as the label (position along the
    roll), ``h ~ U[0, 21]``.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if noise < 0:
        raise InvalidArgumentError(f"noise must be >= 0, got {noise}")
    rng = np.random.default_rng(seed)
    t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, n)
    h = rng.uniform(0.0, 21.0, n)
    X = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    if noise > 0:
        X += noise * rng.standard_normal(X.shape)
    return LabeledDataset(X, t, "swiss-roll", {"n": n, "noise": noise, "seed": seed})


def gen_hypersphere(n, dim, radial_noise=0.0, seed=0) -> LabeledDataset:
    """Uniform samples on the unit sphere in R^dim (normalized Gaussians).

    With ``radial_noise > 0`` each radius is multiplied by
    ``1 + radial_noise * N(0, 1)``.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if dim < 2:
        raise InvalidArgumentError(f"dim must be >= 2, got {dim}")
    if radial_noise < 0:
        raise InvalidArgumentError(f"radial_noise must be >= 0, got {radial_noise}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    norms = np.linalg.norm(X, axis=1)
    while np.any(norms == 0):
        bad = norms == 0
        X[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(X, axis=1)
    X /= norms[:, None]
    if radial_noise > 0:
        X *= (1.0 + radial_noise * rng.standard_normal(n))[:, None]
    return LabeledDataset(
        X, None, "hypersphere", {"n": n, "dim": dim, "radial_noise": radial_noise, "seed": seed}
    )


# IDX -----------------------------------------------------------------------


def _open_maybe_gz(path):
    path = str(path)
    return gzip.open(path, "rb") if path.endswith(".gz") else open(path, "rb")


def _read_exact(f, nbytes, offset, what):
    buf = f.read(nbytes)
    if len(buf) != nbytes:
        raise FormatError(
            f"truncated file at byte offset {offset + len(buf)}: expected {nbytes} bytes of {what}"
        )
    return buf


def read_idx(path, limit=None) -> np.ndarray:
    """Raw unsigned-byte IDX array, optionally only the first ``limit`` items."""
    with _open_maybe_gz(path) as f:
        head = _read_exact(f, 4, 0, "magic")
        if head[0] != 0 or head[1] != 0:
            raise FormatError(f"bad IDX magic {head.hex()} at byte offset 0")
        if head[2] != 0x08:
            raise FormatError(
                f"unsupported IDX element type 0x{head[2]:02x} at byte offset 2 "
                "(only unsigned byte is supported)"
            )
        ndim = head[3]
        if ndim < 1:
            raise FormatError("IDX file declares zero dimensions (byte offset 3)")
        dims = list(struct.unpack(f">{ndim}I", _read_exact(f, 4 * ndim, 4, "dimensions")))
        count = dims[0] if limit is None else min(dims[0], int(limit))
        item = math.prod(dims[1:])
        offset = 4 + 4 * ndim
        payload = _read_exact(f, count * item, offset, "payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape([count, *dims[1:]])


def write_idx(path, array):
    """Write an unsigned-byte array in IDX format."""
    a = np.asarray(array)
    if a.dtype != np.uint8:
        if a.size and (a.min() < 0 or a.max() > 255 or np.any(a != np.round(a))):
            raise InvalidArgumentError("IDX payload must be integers in [0, 255]")
        a = a.astype(np.uint8)
    if not 1 <= a.ndim <= 255:
        raise InvalidArgumentError(f"cannot write a {a.ndim}-d array as IDX")
    header = bytes([0, 0, 0x08, a.ndim]) + struct.pack(f">{a.ndim}I", *a.shape)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(a).tobytes())


def _companion_labels(images_path):
    p = Path(images_path)
    name = p.name
    for old, new in (("images-idx3-ubyte", "labels-idx1-ubyte"), ("images.idx3-ubyte", "labels.idx1-ubyte")):
        if old in name:
            cand = p.with_name(name.replace(old, new))
            if cand.exists():
                return cand
    return None


def load_idx(images_path, limit=None, labels_path=None) -> LabeledDataset:
    """Load IDX images as rows scaled to [0, 1].

    A label file is read from ``labels_path`` or, if not given, from the
    conventionally named companion (``*-labels-idx1-ubyte``) when it exists.
    """
    images = read_idx(images_path, limit)
    if images.ndim < 2:
        raise FormatError(f"{images_path}: expected an image file, got a 1-d IDX array")
    data = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    labels = None
    if labels_path is None:
        labels_path = _companion_labels(images_path)
    if labels_path is not None:
        labels = read_idx(labels_path, limit).reshape(-1).astype(np.float64)
        if len(labels) != data.shape[0]:
            raise FormatError(f"{labels_path}: {len(labels)} labels for {data.shape[0]} images")
    meta = {"source": str(images_path), "limit": limit, "scaling": "pixels / 255"}
    return LabeledDataset(data, labels, Path(images_path).name, meta)


# Dense binary and CSV ------------------------------------------------------


def save_dense(path, data, labels=None):
    data = np.ascontiguousarray(data, dtype="<f8")
    if data.ndim != 2:
        raise InvalidArgumentError(f"data must be 2-D, got shape {data.shape}")
    rows, cols = data.shape
    with open(path, "wb") as f:
        f.write(DENSE_MAGIC)
        f.write(struct.pack("<QQ", rows, cols))
        f.write(data.tobytes())
        if labels is not None:
            labels = np.ascontiguousarray(labels, dtype="<f8")
            if labels.shape != (rows,):
                raise InvalidArgumentError(f"labels shape {labels.shape} != ({rows},)")
            f.write(b"\x01")
            f.write(labels.tobytes())


def _check_finite(data, where):
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise FormatError(f"{where}: non-finite value at row {r}, column {c}")


def _load_dense_binary(path, buf):
    if len(buf) < 24:
        raise FormatError(f"{path}: truncated header at byte offset {len(buf)}")
    rows, cols = struct.unpack_from("<QQ", buf, 8)
    offset = 24
    nbytes = rows * cols * 8
    if len(buf) < offset + nbytes:
        raise FormatError(
            f"{path}: truncated data at byte offset {len(buf)}; "
            f"header declares {rows}x{cols} needing {offset + nbytes} bytes"
        )
    data = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=offset).reshape(rows, cols)
    offset += nbytes
    labels = None
    if len(buf) > offset:
        marker = buf[offset]
        if marker == 1:
            if len(buf) != offset + 1 + rows * 8:
                raise FormatError(
                    f"{path}: label block at byte offset {offset} has wrong length"
                )
            labels = np.frombuffer(buf, dtype="<f8", count=rows, offset=offset + 1).copy()
        elif marker != 0 or len(buf) != offset + 1:
            raise FormatError(f"{path}: unexpected trailing bytes at byte offset {offset}")
    data = data.astype(np.float64)
    _check_finite(data, path)
    return data, labels


def _load_csv(path, text, has_labels):
    rows = []
    width = None
    for r, line in enumerate(csv.reader(io.StringIO(text))):
        if not line or all(not c.strip() for c in line):
            continue
        if width is None:
            width = len(line)
        elif len(line) != width:
            raise FormatError(f"{path}: row {r} has {len(line)} columns, expected {width}")
        vals = []
        for c, cell in enumerate(line):
            try:
                vals.append(float(cell))
            except ValueError:
                raise FormatError(f"{path}: non-numeric cell {cell!r} at row {r}, column {c}") from None
        rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.float64)
    _check_finite(arr, path)
    if has_labels:
        if arr.shape[1] < 2:
            raise FormatError(f"{path}: --has-labels needs at least two columns")
        return arr[:, :-1].copy(), arr[:, -1].copy()
    return arr, None


def load_dense(path, has_labels=False) -> LabeledDataset:
    """Load a dense binary file (by magic) or a CSV file."""
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:8] == DENSE_MAGIC:
        data, labels = _load_dense_binary(path, buf)
        fmt = "dense"
    else:
        try:
            text = buf.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"{path}: neither dense binary nor UTF-8 CSV ({e})") from None
        data, labels = _load_csv(path, text, has_labels)
        fmt = "csv"
    return LabeledDataset(data, labels, Path(path).stem, {"source": str(path), "format": fmt})


def save_csv(path, data, labels=None):
    data = np.asarray(data, dtype=np.float64)
    if labels is not None:
        data = np.column_stack([data, labels])
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for row in data:
            w.writerow([repr(float(x)) for x in row])


def load_any(path, limit=None, has_labels=False) -> LabeledDataset:
    """Dispatch on content: IDX, dense binary, or CSV."""
    with _open_maybe_gz(path) as f:
        head = f.read(8)
    if head[:8] == DENSE_MAGIC:
        ds = load_dense(path)
    elif len(head) >= 4 and head[:2] == b"\x00\x00" and head[2] == 0x08:
        return load_idx(path, limit)
    else:
        ds = load_dense(path, has_labels)
    if limit is not None:
        ds.data = ds.data[:limit]
        if ds.labels is not None:
            ds.labels = ds.labels[:limit]
        ds.meta["limit"] = limit
    return ds
