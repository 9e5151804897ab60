#!/usr/bin/env python3
import unittest

import numpy as np

from dlf_library.internal.exceptions import ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector
from dlf_library.optimizers import AdamState, adam_step, sgd_update


def _params(*values):
    return ParamVector({"p": np.array(values, dtype=np.float64)})


class TestAdam(unittest.TestCase):
    def test_zero_gradient_leaves_theta(self):
        theta = _params(1.0, -2.0)
        state = AdamState.create(theta)
        updated, state = adam_step(theta, theta.zeros_like(), state)
        np.testing.assert_array_equal(updated["p"], theta["p"])
        self.assertEqual(state.step_count, 1)

    def test_first_step_moves_by_alpha(self):
        theta = _params(0.0, 0.0)
        state = AdamState.create(theta)
        updated, _ = adam_step(theta, _params(1.0, -3.0), state)
        np.testing.assert_allclose(updated["p"], [-1e-4, 1e-4], rtol=1e-6)

    def test_steps_are_bounded_by_alpha(self):
        rng = np.random.default_rng(0)
        theta = _params(*rng.normal(size=5))
        state = AdamState.create(theta, alpha=1e-3)
        for _ in range(2):
            updated, state = adam_step(theta, _params(*rng.normal(size=5)), state)
            self.assertLessEqual(np.abs(updated["p"] - theta["p"]).max(), 1e-3 * (1 + 1e-6))
            theta = updated
        self.assertEqual(state.step_count, 2)

    def test_inputs_unchanged(self):
        theta = _params(1.0)
        state = AdamState.create(theta)
        adam_step(theta, _params(2.0), state)
        self.assertEqual(theta["p"][0], 1.0)
        self.assertEqual(state.step_count, 0)
        self.assertEqual(state.m["p"][0], 0.0)

    def test_structure_checked(self):
        theta = _params(1.0)
        with self.assertRaises(ShapeMismatchException):
            adam_step(theta, _params(1.0, 2.0), AdamState.create(theta))


class TestSgd(unittest.TestCase):
    def test_update(self):
        updated = sgd_update(_params(1.0, 2.0), _params(0.5, -1.0), 0.1)
        np.testing.assert_allclose(updated["p"], [0.95, 2.1])


if __name__ == "__main__":
    unittest.main()
