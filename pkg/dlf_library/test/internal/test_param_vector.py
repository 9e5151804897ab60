#!/usr/bin/env python3
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from dlf_library.internal.exceptions import DuplicateSegmentException, ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector


class TestParamVector(unittest.TestCase):
    def setUp(self):
        self.p = ParamVector([("w", np.arange(6.0).reshape(2, 3)), ("b", np.array([7.0, 8.0]))])

    def test_flatten_follows_segment_order(self):
        assert_array_equal(self.p.flatten(), [0, 1, 2, 3, 4, 5, 7, 8])
        self.assertEqual(self.p.total_len, 8)
        self.assertEqual(self.p.names, ["w", "b"])

    def test_unflatten_restores_shapes(self):
        restored = self.p.unflatten(self.p.flatten())
        self.assertTrue(restored.array_equal(self.p))
        self.assertEqual(restored["w"].shape, (2, 3))

    def test_unflatten_rejects_wrong_length(self):
        with self.assertRaises(ShapeMismatchException):
            self.p.unflatten(np.zeros(7))

    def test_duplicate_names_are_rejected(self):
        with self.assertRaises(DuplicateSegmentException):
            ParamVector([("w", np.zeros(1)), ("w", np.zeros(1))])

    def test_arithmetic_is_segmentwise(self):
        total = self.p + self.p * 2.0
        assert_array_equal(total.flatten(), 3.0 * self.p.flatten())
        assert_array_equal((-self.p).flatten(), -self.p.flatten())
        self.assertEqual(self.p.dot(self.p), float(np.sum(self.p.flatten() ** 2)))

    def test_arithmetic_checks_structure(self):
        other = ParamVector([("w", np.zeros((3, 2))), ("b", np.zeros(2))])
        with self.assertRaises(ShapeMismatchException):
            self.p - other

    def test_values_are_copied_in(self):
        source = np.zeros(2)
        p = ParamVector({"x": source})
        source[0] = 5.0
        self.assertEqual(p["x"][0], 0.0)

    def test_leaves_require_grad(self):
        leaves = self.p.leaves()
        self.assertTrue(all(t.requires_grad for t in leaves.values()))
        self.assertFalse(any(t.requires_grad for t in self.p.constants().values()))


if __name__ == "__main__":
    unittest.main()
