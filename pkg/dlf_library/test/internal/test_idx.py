#!/usr/bin/env python3
import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from dlf_library.data import Dataset, load_mnist_idx, save_mnist_idx
from dlf_library.internal.idx import (
    IdxFormatException,
    read_file,
    read_idx_images,
    read_idx_labels,
    write_file,
    write_idx_images,
    write_idx_labels,
)

LABELS = bytes([0, 0, 8, 1, 0, 0, 0, 3, 7, 2, 1])
IMAGES = bytes([0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 0, 255])


class TestIdx(unittest.TestCase):
    def test_labels(self):
        assert_array_equal(read_idx_labels(LABELS), [7, 2, 1])

    def test_images(self):
        images = read_idx_images(IMAGES)
        self.assertEqual(images.shape, (1, 2, 2))
        assert_array_equal(images.ravel(), [0, 255, 0, 255])

    def test_bad_magic(self):
        payload = bytes([0, 0, 8, 2]) + LABELS[4:]
        with self.assertRaises(IdxFormatException) as ctx:
            read_idx_labels(payload, "labels.idx")
        self.assertIn("bad magic", str(ctx.exception))
        self.assertEqual(ctx.exception.offset, 0)

    def test_truncated_payload(self):
        with self.assertRaises(IdxFormatException) as ctx:
            read_idx_labels(LABELS[:-1])
        self.assertIn("truncated payload", str(ctx.exception))
        self.assertEqual(ctx.exception.offset, len(LABELS) - 1)

    def test_truncated_header(self):
        with self.assertRaises(IdxFormatException) as ctx:
            read_idx_images(IMAGES[:10])
        self.assertIn("truncated header", str(ctx.exception))

    def test_writers_reproduce_the_crafted_bytes(self):
        self.assertEqual(write_idx_labels([7, 2, 1]), LABELS)
        self.assertEqual(write_idx_images(np.array([[[0, 255], [0, 255]]])), IMAGES)


class TestMnistFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.images = os.path.join(self.tmp.name, "images.idx")
        self.labels = os.path.join(self.tmp.name, "labels.idx.gz")

    def tearDown(self):
        self.tmp.cleanup()

    def test_load_scales_and_flattens(self):
        write_file(self.images, IMAGES)
        write_file(self.labels, write_idx_labels([4]))
        ds = load_mnist_idx(self.images, self.labels)
        assert_array_equal(ds.inputs, [[0.0, 1.0, 0.0, 1.0]])
        assert_array_equal(ds.labels, [4])
        self.assertEqual(ds.n_classes, 10)

    def test_count_mismatch(self):
        write_file(self.images, IMAGES)
        write_file(self.labels, write_idx_labels([4, 5]))
        with self.assertRaises(IdxFormatException) as ctx:
            load_mnist_idx(self.images, self.labels)
        self.assertIn("count mismatch", str(ctx.exception))

    def test_gzip_files_are_transparent(self):
        write_file(self.labels, LABELS)
        self.assertEqual(read_file(self.labels), LABELS)
        with open(self.labels, "rb") as f:
            self.assertNotEqual(f.read(), LABELS)

    def test_write_then_read_is_exact_on_the_pixel_grid(self):
        rng = np.random.default_rng(0)
        pixels = rng.integers(0, 256, size=(5, 3, 3))
        ds = Dataset(pixels.reshape(5, 9) / 255.0, rng.integers(0, 10, size=5), 10)
        save_mnist_idx(ds, self.images, self.labels)
        loaded = load_mnist_idx(self.images, self.labels)
        self.assertTrue(loaded.array_equal(ds))


if __name__ == "__main__":
    unittest.main()
