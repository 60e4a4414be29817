"""Dataset ingestion and persistence: MNIST IDX files, spike-train CSV,
spike-time binning, mixture sample CSV, and the text checkpoint format.

Loaders reject malformed input with an error naming the location; there
are no partial silent reads. Checkpoints round-trip parameter vectors
bitwise (17-significant-digit decimal).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .models.poglm import SpikeTrain
from .params import ParamVector, pack
from .rng import RngStream

MNIST_IMAGE_MAGIC = 2051
MNIST_LABEL_MAGIC = 2049
CHECKPOINT_MAGIC = "VISCKPT1"


@dataclass(frozen=True)
class MnistSet:
    images: np.ndarray   # (count, 784) float64 in [0, 1]
    labels: np.ndarray   # (count,) uint8


def _read_be32(fh, path, what):
    data = fh.read(4)
    if len(data) != 4:
        raise DataError(f"{path}: truncated {what} at byte offset {fh.tell() - len(data)}")
    return struct.unpack(">i", data)[0]


def load_mnist_idx(images_path, labels_path) -> MnistSet:
    """Parse the big-endian IDX pair (magic, count, rows, cols; then raw
    bytes). Pixels are scaled to [0, 1] by /255."""
    with open(images_path, "rb") as fh:
        magic = _read_be32(fh, images_path, "magic")
        if magic != MNIST_IMAGE_MAGIC:
            raise DataError(f"{images_path}: bad image magic {magic} at offset 0")
        count = _read_be32(fh, images_path, "count")
        rows = _read_be32(fh, images_path, "rows")
        cols = _read_be32(fh, images_path, "cols")
        if rows != 28 or cols != 28:
            raise DataError(f"{images_path}: expected 28x28 images, got {rows}x{cols}")
        raw = fh.read(count * rows * cols)
        if len(raw) != count * rows * cols:
            raise DataError(
                f"{images_path}: truncated pixel data at byte offset {16 + len(raw)}")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)
    with open(labels_path, "rb") as fh:
        magic = _read_be32(fh, labels_path, "magic")
        if magic != MNIST_LABEL_MAGIC:
            raise DataError(f"{labels_path}: bad label magic {magic} at offset 0")
        lcount = _read_be32(fh, labels_path, "count")
        if lcount != count:
            raise DataError(
                f"{labels_path}: label count {lcount} != image count {count}")
        raw = fh.read(lcount)
        if len(raw) != lcount:
            raise DataError(f"{labels_path}: truncated labels at byte offset {8 + len(raw)}")
        labels = np.frombuffer(raw, dtype=np.uint8).copy()
    return MnistSet(images.astype(np.float64) / 255.0, labels)


def write_mnist_idx(images_path, labels_path, images: np.ndarray,
                    labels: np.ndarray):
    """Write an IDX pair; images are (count, 784) floats in [0, 1]."""
    images = np.asarray(images)
    labels = np.asarray(labels)
    count = images.shape[0]
    pix = np.clip(np.round(images * 255.0), 0, 255).astype(np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">iiii", MNIST_IMAGE_MAGIC, count, 28, 28))
        fh.write(pix.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">ii", MNIST_LABEL_MAGIC, count))
        fh.write(labels.astype(np.uint8).tobytes())


def synthetic_digits(n: int, rng: RngStream):
    """Digit-like 28x28 grayscale images: a blurred ring plus strokes
    positioned by the label. A stand-in corpus for environments without
    the real handwriting files; same value range and file format."""
    yy, xx = np.mgrid[0:28, 0:28].astype(np.float64)
    images = np.zeros((n, 784))
    labels = rng.integers(0, 10, size=n).astype(np.uint8)
    for i in range(n):
        d = int(labels[i])
        cx = 13.5 + 3.0 * np.cos(2 * np.pi * d / 10) + rng.normal(0, 0.7)
        cy = 13.5 + 3.0 * np.sin(2 * np.pi * d / 10) + rng.normal(0, 0.7)
        r = 4.0 + 0.4 * d + rng.normal(0, 0.3)
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        img = np.exp(-0.5 * ((dist - r) / 1.4) ** 2)
        ang = 2 * np.pi * d / 10
        t = np.linspace(-6, 6, 40)
        sx = np.clip(cx + t * np.cos(ang), 0, 27).astype(int)
        sy = np.clip(cy + t * np.sin(ang), 0, 27).astype(int)
        img[sy, sx] = np.maximum(img[sy, sx], 0.9)
        img += rng.uniform(0, 0.02, size=(28, 28))
        images[i] = np.clip(img, 0.0, 1.0).reshape(-1)
    return images, labels


def bin_spike_times(times, bin_ms: float, t_total: float,
                    n_neurons: int | None = None) -> SpikeTrain:
    """Counts per half-open bin [t*bin, (t+1)*bin) for events given as
    (neuron, seconds) pairs; the trailing partial bin is dropped. All
    binned neurons are visible."""
    if bin_ms <= 0:
        raise ValueError(f"bin_ms must be positive, got {bin_ms}")
    bin_s = bin_ms / 1000.0
    t_bins = int(np.floor(t_total / bin_s + 1e-9))
    events = list(times)
    if n_neurons is None:
        n_neurons = 1 + max((int(n) for n, _ in events), default=-1)
    counts = np.zeros((t_bins, n_neurons), dtype=np.int64)
    for neuron, sec in events:
        if sec < 0:
            raise ValueError(f"negative spike time {sec} for neuron {neuron}")
        b = int(np.floor(sec / bin_s + 1e-9))
        if b < t_bins:
            counts[b, int(neuron)] += 1
    return SpikeTrain(counts, visible=n_neurons)


def read_spike_times_csv(path):
    """(neuron, seconds) rows with a `neuron,seconds` header."""
    events = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "neuron,seconds":
            raise DataError(f"{path}: expected header 'neuron,seconds', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                n_str, s_str = line.split(",")
                events.append((int(n_str), float(s_str)))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad spike-time row {line!r}") from exc
    return events


def split_into_pieces(train: SpikeTrain, piece_len: int) -> list[SpikeTrain]:
    """Consecutive non-overlapping pieces; the remainder is dropped.
    Each piece starts with fresh (all-zero) history by construction."""
    if piece_len < 1:
        raise ValueError(f"piece_len must be >= 1, got {piece_len}")
    pieces = []
    for start in range(0, train.t - piece_len + 1, piece_len):
        pieces.append(SpikeTrain(train.y[start:start + piece_len].copy(),
                                 train.visible))
    return pieces


def write_spike_train_csv(path, train: SpikeTrain):
    """Sparse triplet format: a T,V,H sidecar header then t,n,count rows
    for the nonzero cells."""
    with open(path, "w") as fh:
        fh.write("T,V,H\n")
        fh.write(f"{train.t},{train.visible},{train.hidden}\n")
        fh.write("t,n,count\n")
        ts, ns = np.nonzero(train.y)
        for t, n in zip(ts, ns):
            fh.write(f"{t},{n},{train.y[t, n]}\n")


def read_spike_train_csv(path) -> SpikeTrain:
    with open(path) as fh:
        if fh.readline().strip() != "T,V,H":
            raise DataError(f"{path}: missing T,V,H sidecar line")
        try:
            t_len, v, h = (int(c) for c in fh.readline().strip().split(","))
        except ValueError as exc:
            raise DataError(f"{path}: bad T,V,H values") from exc
        if fh.readline().strip() != "t,n,count":
            raise DataError(f"{path}: missing t,n,count header")
        y = np.zeros((t_len, v + h), dtype=np.int64)
        for lineno, line in enumerate(fh, start=4):
            line = line.strip()
            if not line:
                continue
            try:
                t, n, c = (int(x) for x in line.split(","))
                y[t, n] = c
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: bad triplet {line!r}") from exc
    return SpikeTrain(y, visible=v)


def write_mixture_csv(path, x: np.ndarray, z: np.ndarray):
    with open(path, "w") as fh:
        fh.write("x,z\n")
        for xi, zi in zip(x, z):
            fh.write(f"{int(xi)},{float(zi)!r}\n")


def read_mixture_csv(path):
    xs, zs = [], []
    with open(path) as fh:
        if fh.readline().strip() != "x,z":
            raise DataError(f"{path}: expected header 'x,z'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                x_str, z_str = line.split(",")
                xs.append(int(x_str))
                zs.append(float(z_str))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad sample row {line!r}") from exc
    return np.array(xs, dtype=np.int64), np.array(zs)


def write_checkpoint(path, params: ParamVector):
    """Text checkpoint. Header line per segment: name, rows, cols, rank;
    rank disambiguates scalars/vectors from 1xN or Nx1 matrices so the
    layout survives the round trip exactly."""
    with open(path, "w") as fh:
        fh.write(CHECKPOINT_MAGIC + "\n")
        for name, shape in params.layout:
            seg = params.segment(name)
            if seg.ndim > 2:
                raise ValueError(f"segment {name!r} has rank {seg.ndim} > 2")
            mat = np.atleast_2d(seg)
            rows, cols = mat.shape
            fh.write(f"{name} {rows} {cols} {seg.ndim}\n")
            for r in range(rows):
                fh.write(" ".join(f"{v:.17g}" for v in mat[r]) + "\n")


def read_checkpoint(path) -> ParamVector:
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != CHECKPOINT_MAGIC:
            raise DataError(f"{path}: bad checkpoint magic {magic!r}")
        segments = []
        lineno = 1
        while True:
            header = fh.readline()
            lineno += 1
            if not header:
                break
            header = header.strip()
            if not header:
                continue
            parts = header.split()
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: bad segment header {header!r}")
            name = parts[0]
            try:
                rows, cols, rank = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad segment header {header!r}") from exc
            mat = np.zeros((rows, cols))
            for r in range(rows):
                line = fh.readline()
                lineno += 1
                if not line:
                    raise DataError(
                        f"{path}:{lineno}: segment {name!r} truncated at row {r}")
                cells = line.split()
                if len(cells) != cols:
                    raise DataError(
                        f"{path}:{lineno}: segment {name!r} row {r} has "
                        f"{len(cells)} values, expected {cols}")
                mat[r] = [float(c) for c in cells]
            if rank == 0:
                segments.append((name, mat.reshape(())))
            elif rank == 1:
                segments.append((name, mat.reshape(-1)))
            else:
                segments.append((name, mat))
    return pack(segments)
