# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dataclasses import dataclass

import numpy as np

from dlf_library.internal import idx
from dlf_library.internal.exceptions import DatasetException, InvalidLabelException

""" Datasets, splits and the minibatch schedules of inner training.

Every source of randomness takes an explicit seed and builds its own
numpy Generator; nothing here touches global random state.
"""


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if inputs.ndim != 2:
            raise DatasetException("inputs must be a (n, d) array, got shape %s" % (inputs.shape,))
        if labels.shape != (inputs.shape[0],):
            raise DatasetException(
                "%d input rows but %d labels" % (inputs.shape[0], labels.size)
            )
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            bad = labels[(labels < 0) | (labels >= self.n_classes)][0]
            raise InvalidLabelException(int(bad), self.n_classes)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self):
        return self.inputs.shape[1]

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.inputs[indices], self.labels[indices], self.n_classes)

    def concat(self, other):
        if other.n_classes != self.n_classes or other.dim != self.dim:
            raise DatasetException("cannot concatenate datasets of different shape")
        return Dataset(
            np.concatenate([self.inputs, other.inputs]),
            np.concatenate([self.labels, other.labels]),
            self.n_classes,
        )

    def array_equal(self, other):
        return (
            self.n_classes == other.n_classes
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class BatchSchedule:
    batches: tuple
    seed: int

    def __len__(self):
        return len(self.batches)


def load_mnist_idx(images_path, labels_path, n_classes=10):
    """Reads an IDX image/label file pair into a Dataset with pixels in [0, 1],
    each image flattened to rows*cols features"""
    images = idx.read_idx_images(idx.read_file(images_path), str(images_path))
    labels = idx.read_idx_labels(idx.read_file(labels_path), str(labels_path))
    if images.shape[0] != labels.shape[0]:
        raise idx.IdxFormatException(
            str(labels_path),
            4,
            "count mismatch: %d labels for %d images" % (labels.shape[0], images.shape[0]),
        )
    inputs = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    return Dataset(inputs, labels, n_classes)


def save_mnist_idx(ds, images_path, labels_path, rows=None, cols=None):
    """Writes ds as an IDX pair; inputs are quantized to round(255 * x)"""
    if rows is None or cols is None:
        side = int(round(np.sqrt(ds.dim)))
        rows, cols = side, ds.dim // side
    if rows * cols != ds.dim:
        raise DatasetException("%d features do not form a %dx%d image" % (ds.dim, rows, cols))
    pixels = np.clip(np.rint(ds.inputs * 255.0), 0, 255).reshape(len(ds), rows, cols)
    idx.write_file(images_path, idx.write_idx_images(pixels))
    idx.write_file(labels_path, idx.write_idx_labels(ds.labels))


def _class_counts(n, proportions):
    """Rounds n * proportions to integers summing to n, giving leftover units to
    the largest remainders (lowest class index on ties)"""
    raw = np.asarray(proportions, dtype=np.float64) * n
    counts = np.floor(raw).astype(np.int64)
    remainders = raw - counts
    order = sorted(range(len(raw)), key=lambda c: (-remainders[c], c))
    for c in order[: n - int(counts.sum())]:
        counts[c] += 1
    return counts


def synth_blobs(n, n_classes, dim, separation, proportions=None, seed=0):
    """Gaussian blobs: class c is drawn from N(separation * center_c, I) where
    the centers are seeded standard-normal draws.  Features are then min-max
    scaled into [0, 1] over the whole sample and the rows shuffled.

    Keyword arguments:
    n           -- number of examples
    n_classes   -- number of classes
    dim         -- input dimension
    separation  -- scale applied to the class centers; 0 gives identical classes
    proportions -- class proportions summing to 1 (default balanced)
    seed        -- seed of the generator

    """
    if n_classes < 1 or dim < 1:
        raise DatasetException("n_classes and dim must be positive")
    if n < n_classes:
        raise DatasetException("n=%d is smaller than n_classes=%d" % (n, n_classes))
    if proportions is None:
        proportions = [1.0 / n_classes] * n_classes
    proportions = np.asarray(proportions, dtype=np.float64)
    if proportions.shape != (n_classes,) or np.any(proportions < 0):
        raise DatasetException("proportions must be %d non-negative values" % n_classes)
    if abs(proportions.sum() - 1.0) > 1e-9:
        raise DatasetException("proportions sum to %r, not 1" % float(proportions.sum()))

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_classes, dim)) * separation
    counts = _class_counts(n, proportions)
    labels = np.repeat(np.arange(n_classes), counts)
    inputs = centers[labels] + rng.standard_normal((n, dim))
    lo = inputs.min(axis=0)
    span = inputs.max(axis=0) - lo
    span[span == 0] = 1.0
    inputs = (inputs - lo) / span
    order = rng.permutation(n)
    return Dataset(inputs[order], labels[order], n_classes)


def split(ds, sizes, seed=0):
    """Disjoint seeded train/dev/test subsets of the given sizes"""
    sizes = [int(s) for s in sizes]
    if len(sizes) != 3 or any(s < 0 for s in sizes):
        raise DatasetException("sizes must be three non-negative counts")
    if sum(sizes) > len(ds):
        raise DatasetException("split sizes %s exceed the %d available examples" % (sizes, len(ds)))
    order = np.random.default_rng(seed).permutation(len(ds))
    bounds = np.cumsum([0] + sizes)
    return tuple(ds.take(order[bounds[i] : bounds[i + 1]]) for i in range(3))


def make_schedule(n, T, batch_size, seed=0):
    """T minibatches drawn in order from a stream of seeded permutations of
    range(n); a fresh permutation starts at every epoch boundary"""
    if n < 1:
        raise DatasetException("cannot schedule batches over an empty dataset")
    if batch_size < 1 or T < 0:
        raise DatasetException("batch_size must be >= 1 and T >= 0")
    rng = np.random.default_rng(seed)
    needed = T * batch_size
    stream = []
    filled = 0
    while filled < needed:
        stream.append(rng.permutation(n))
        filled += n
    flat = np.concatenate(stream) if stream else np.zeros(0, dtype=np.int64)
    batches = tuple(flat[t * batch_size : (t + 1) * batch_size].copy() for t in range(T))
    return BatchSchedule(batches, seed)
