"""Datasets for the laboratory: IDX ingestion, a synthetic teacher task,
label noise, one-hot targets and nested subsampling."""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import FormatError, InputError
from .features import FeatureMap, apply_feature_map, sample_feature_map
from .validation import as_matrix, check_labels, check_probability

# IDX type byte -> big-endian numpy dtype
IDX_TYPES = {0x08: ">u1", 0x09: ">i1", 0x0B: ">i2", 0x0C: ">i4"}

FASHION_MNIST_FILES = {
    "train-images": ("train-images-idx3-ubyte", 47040016),
    "train-labels": ("train-labels-idx1-ubyte", 60008),
    "test-images": ("t10k-images-idx3-ubyte", 7840016),
    "test-labels": ("t10k-labels-idx1-ubyte", 10008),
}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs with noisy and clean integer labels plus the seeds that made them."""

    inputs: np.ndarray
    labels: np.ndarray
    clean_labels: np.ndarray
    num_classes: int
    noise_p: float = 0.0
    seeds: tuple = (None, None)

    def __post_init__(self):
        if int(self.num_classes) != self.num_classes or self.num_classes < 1:
            raise InputError(f"num_classes must be a positive integer, got {self.num_classes!r}")
        check_probability(self.noise_p, "noise_p")
        labels = check_labels(self.labels, self.num_classes)
        clean = check_labels(self.clean_labels, self.num_classes, "clean_labels")
        inputs = np.asarray(self.inputs)
        if labels.shape != clean.shape or labels.shape[0] != inputs.shape[0]:
            raise InputError("inputs, labels and clean_labels must have matching lengths")
        if self.noise_p == 0 and not np.array_equal(labels, clean):
            raise InputError("labels differ from clean_labels although noise_p is 0")
        # read-only views: the dataset is immutable, the caller's arrays are not touched
        for name, arr in (("inputs", inputs), ("labels", labels), ("clean_labels", clean)):
            view = arr.view()
            view.setflags(write=False)
            object.__setattr__(self, name, view)

    @property
    def n(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def flipped(self) -> np.ndarray:
        return self.labels != self.clean_labels

    def targets(self) -> np.ndarray:
        return one_hot(self.labels, self.num_classes)

    def clean_targets(self) -> np.ndarray:
        return one_hot(self.clean_labels, self.num_classes)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and self.noise_p == other.noise_p
            and self.seeds == other.seeds
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.clean_labels, other.clean_labels)
        )

    __hash__ = None


@dataclass(frozen=True)
class LabelNoiseSpec:
    p: float
    seed: int = 0

    def __post_init__(self):
        check_probability(self.p, "label noise p")


@dataclass(frozen=True, eq=False)
class Teacher:
    """Random-feature teacher; labels are the argmax of centered scores."""

    feature_map: FeatureMap
    coef: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.coef.shape[1]

    def scores(self, X) -> np.ndarray:
        # centering removes the per-class offset that cos features carry
        # under Gaussian inputs; without it one class swallows the rest
        phi = apply_feature_map(self.feature_map, X) - self.feature_map.gaussian_mean()
        return phi @ self.coef


# -- IDX ---------------------------------------------------------------------

def _read_bytes(path) -> bytes:
    path = Path(path)
    with open(path, "rb") as f:
        head = f.read(2)
        f.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(f) as g:
                return g.read()
        return f.read()


def parse_idx(buf: bytes) -> np.ndarray:
    """Parse an in-memory IDX document. See :func:`load_idx`."""
    size = len(buf)
    if size < 4:
        raise FormatError(f"IDX header truncated: {size} of 4 magic bytes present", offset=size)
    if buf[0] != 0 or buf[1] != 0:
        bad = 0 if buf[0] != 0 else 1
        raise FormatError(f"bad IDX magic byte 0x{buf[bad]:02x}, expected 0x00", offset=bad)
    type_byte, ndim = buf[2], buf[3]
    if type_byte not in IDX_TYPES:
        raise FormatError(f"unsupported IDX type byte 0x{type_byte:02x}", offset=2)
    if ndim == 0:
        raise FormatError("IDX dimension count is zero", offset=3)
    header = 4 + 4 * ndim
    if size < header:
        raise FormatError(
            f"IDX header truncated: {ndim} dimensions need {header} bytes, file has {size}",
            offset=size,
        )
    dims = struct.unpack(f">{ndim}I", buf[4:header])
    dtype = np.dtype(IDX_TYPES[type_byte])
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    actual = size - header
    if actual < expected:
        raise FormatError(
            f"IDX payload truncated: shape {dims} needs {expected} bytes, found {actual}",
            offset=size,
        )
    if actual > expected:
        raise FormatError(
            f"IDX payload has {actual - expected} trailing bytes after shape {dims}",
            offset=header + expected,
        )
    arr = np.frombuffer(buf, dtype=dtype, count=expected // dtype.itemsize, offset=header)
    return arr.reshape(dims).astype(dtype.newbyteorder("="))


def load_idx(path) -> np.ndarray:
    """Read an IDX tensor (optionally gzip-compressed) from ``path``.

    The layout is two zero bytes, a type byte, a dimension count, one
    big-endian uint32 per dimension and then the row-major payload. The
    payload length must match the header exactly.
    """
    return parse_idx(_read_bytes(path))


def save_idx(path, array) -> None:
    array = np.asarray(array)
    codes = {np.dtype(v).newbyteorder("="): k for k, v in IDX_TYPES.items()}
    code = codes.get(array.dtype.newbyteorder("="))
    if code is None:
        raise InputError(f"dtype {array.dtype} has no IDX type code")
    header = bytes([0, 0, code, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape)
    payload = array.astype(IDX_TYPES[code]).tobytes()
    Path(path).write_bytes(header + payload)


def fashion_mnist_paths(data_dir) -> dict:
    """Resolve the four Fashion-MNIST files, accepting a ``.gz`` suffix."""
    data_dir = Path(data_dir)
    out = {}
    for key, (stem, _) in FASHION_MNIST_FILES.items():
        plain, gz = data_dir / stem, data_dir / (stem + ".gz")
        if plain.exists():
            out[key] = plain
        elif gz.exists():
            out[key] = gz
        else:
            raise FileNotFoundError(f"Fashion-MNIST file not found: {plain} (or {gz})")
    return out


def load_fashion_mnist(data_dir):
    """Return ``(train, test)`` datasets with flattened inputs scaled to [0, 1]."""
    paths = fashion_mnist_paths(data_dir)
    out = []
    for split in ("train", "test"):
        images = load_idx(paths[f"{split}-images"])
        labels = load_idx(paths[f"{split}-labels"])
        if images.ndim != 3 or labels.ndim != 1 or images.shape[0] != labels.shape[0]:
            raise FormatError(
                f"{split} images {images.shape} and labels {labels.shape} are inconsistent"
            )
        labels = check_labels(labels, 10)
        inputs = normalize(images.reshape(images.shape[0], -1))
        out.append(Dataset(inputs, labels, labels.copy(), 10))
    return tuple(out)


# -- synthetic ---------------------------------------------------------------

def make_teacher(input_dim, num_classes=10, num_features=50, seed=0) -> Teacher:
    fmap = sample_feature_map(input_dim, num_features, seed=seed)
    rng = np.random.default_rng([seed, 1])
    coef = rng.normal(size=(fmap.n_outputs, num_classes))
    coef.setflags(write=False)
    return Teacher(fmap, coef)


def make_synthetic(input_dim, n, num_classes, teacher: Teacher, seed) -> Dataset:
    """Gaussian inputs labelled by the teacher's argmax. Deterministic in ``seed``."""
    if num_classes < 2:
        raise InputError("a classification task needs at least 2 classes")
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if teacher.feature_map.input_dim != input_dim:
        raise InputError(
            f"teacher expects input dimension {teacher.feature_map.input_dim}, got {input_dim}"
        )
    if teacher.coef.shape != (teacher.feature_map.n_outputs, num_classes):
        raise InputError(
            f"teacher coefficients {teacher.coef.shape} do not map "
            f"{teacher.feature_map.n_outputs} features to {num_classes} classes"
        )
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((int(n), int(input_dim)))
    labels = np.argmax(teacher.scores(X), axis=1).astype(np.int64)
    return Dataset(X, labels, labels.copy(), int(num_classes), 0.0, (int(seed), None))


# -- transforms ----------------------------------------------------------------

def apply_label_noise(ds: Dataset, spec: LabelNoiseSpec) -> Dataset:
    """Flip each clean label with probability ``spec.p`` to a uniformly random
    *incorrect* class. The flips are drawn once from ``spec.seed``; the same
    seed at a larger ``p`` flips a superset of samples."""
    if ds.num_classes < 2:
        raise InputError("label noise needs at least 2 classes")
    # separate streams keep sample i's draw independent of n (prefix-stable)
    flip_seq, class_seq = np.random.SeedSequence(spec.seed).spawn(2)
    u = np.random.default_rng(flip_seq).random(ds.n)
    offsets = np.random.default_rng(class_seq).integers(1, ds.num_classes, size=ds.n)
    flip = u < spec.p
    labels = np.where(flip, (ds.clean_labels + offsets) % ds.num_classes, ds.clean_labels)
    return replace(ds, labels=labels, noise_p=float(spec.p), seeds=(ds.seeds[0], int(spec.seed)))


def one_hot(labels, num_classes) -> np.ndarray:
    labels = check_labels(labels, num_classes)
    out = np.zeros((labels.shape[0], int(num_classes)))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def subsample(ds: Dataset, n, seed) -> Dataset:
    """First ``n`` rows of one seeded permutation, so equal seeds give nested subsets."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if n > ds.n:
        raise InputError(f"cannot draw {n} samples from a dataset of {ds.n}")
    idx = subsample_indices(ds.n, int(n), seed)
    return replace(
        ds, inputs=ds.inputs[idx], labels=ds.labels[idx], clean_labels=ds.clean_labels[idx]
    )


def subsample_indices(total, n, seed) -> np.ndarray:
    return np.random.default_rng(seed).permutation(total)[:n]


def normalize(inputs) -> np.ndarray:
    """Map raw byte pixels to [0, 1]; real-valued inputs pass through."""
    arr = np.asarray(inputs)
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.float64) / 255.0
    return as_matrix(arr, "inputs") if arr.ndim == 2 else arr.astype(np.float64)


def train_test_split(ds: Dataset, test_size, seed):
    if not 0 < test_size < ds.n:
        raise InputError(f"test_size must be in (0, {ds.n}), got {test_size}")
    perm = np.random.default_rng(seed).permutation(ds.n)
    pick = lambda idx: replace(ds, inputs=ds.inputs[idx], labels=ds.labels[idx],
                               clean_labels=ds.clean_labels[idx])
    return pick(perm[test_size:]), pick(perm[:test_size])


# -- samplers ------------------------------------------------------------------

class SyntheticSource:
    """Draws fresh i.i.d. samples from a fixed teacher."""

    capacity: Optional[int] = None

    def __init__(self, input_dim=20, num_classes=10, teacher_features=50, teacher_seed=0):
        self.input_dim = int(input_dim)
        self.num_classes = int(num_classes)
        self.teacher = make_teacher(input_dim, num_classes, teacher_features, teacher_seed)

    def sample(self, n, seed) -> Dataset:
        return make_synthetic(self.input_dim, n, self.num_classes, self.teacher, seed)


class PoolSource:
    """Draws subsets without replacement from a finite pool (e.g. Fashion-MNIST)."""

    def __init__(self, pool: Dataset):
        self.pool = pool
        self.input_dim = pool.input_dim
        self.num_classes = pool.num_classes
        self.capacity = pool.n

    def sample(self, n, seed) -> Dataset:
        if n > self.capacity:
            raise InputError(f"source holds {self.capacity} samples, {n} requested")
        return subsample(self.pool, n, seed)


def data_dir_from_env(default="~/.cache/ddlab") -> Path:
    return Path(os.environ.get("DDLAB_DATA_DIR", default)).expanduser()
