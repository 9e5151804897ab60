#!/usr/bin/env python3
import os
import tempfile
import unittest

import numpy as np
from toy_problems import central_difference, relative_error, toy_teacher

from dlf_library.internal import checkpoint
from dlf_library.internal import tensor as tn
from dlf_library.internal.autodiff import grad
from dlf_library.internal.checkpoint import CheckpointFormatException
from dlf_library.internal.exceptions import InvalidStateException, ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector
from dlf_library.losses import DIAGONAL, FULL
from dlf_library.teacher import (
    StateVector,
    TeacherParams,
    attention_coefficients,
    featurize_state,
    init_teacher,
    load_teacher,
    save_teacher,
    state_length,
    teacher_forward,
)


def _state(rng, length):
    return StateVector(rng.uniform(size=length))


class TestTeacherForward(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_zero_v_averages_the_slices(self):
        W = self.rng.normal(size=(3, 3, 4))
        theta = TeacherParams(W, np.zeros((4, 6)))
        phi = teacher_forward(theta, _state(self.rng, 6))
        np.testing.assert_allclose(phi.values.data, W.mean(axis=2), rtol=0, atol=1e-12)

    def test_single_key_returns_its_slice(self):
        W = self.rng.normal(size=(3, 3, 1))
        theta = TeacherParams(W, self.rng.normal(size=(1, 6)))
        phi = teacher_forward(theta, _state(self.rng, 6))
        np.testing.assert_allclose(phi.values.data, W[:, :, 0], rtol=0, atol=1e-12)

    def test_coefficients_stay_within_the_slices(self):
        for _ in range(10):
            W = self.rng.normal(size=(3, 3, 5))
            theta = TeacherParams(W, self.rng.normal(scale=3.0, size=(5, 6)))
            phi = teacher_forward(theta, _state(self.rng, 6)).values.data
            self.assertTrue(np.all(phi >= W.min(axis=2) - 1e-12))
            self.assertTrue(np.all(phi <= W.max(axis=2) + 1e-12))

    def test_attention_is_a_distribution(self):
        theta = TeacherParams(np.eye(5), self.rng.normal(size=(5, 4)))
        # Diagonal kind with W = I gives the attention weights themselves
        attention = teacher_forward(theta, _state(self.rng, 4)).values.data
        self.assertAlmostEqual(attention.sum(), 1.0, delta=1e-12)
        self.assertTrue(np.all(attention > 0.0))

    def test_invariant_to_a_shift_of_the_logits(self):
        W = self.rng.normal(size=(2, 2, 3))
        V = self.rng.normal(size=(3, 5))
        s = StateVector(np.array([0.5, 0.2, 0.1, 0.9, 0.3]))
        # Adding the same row to every key shifts every logit equally
        shifted = V + self.rng.normal(size=(1, 5))
        a = teacher_forward(TeacherParams(W, V), s).values.data
        b = teacher_forward(TeacherParams(W, shifted), s).values.data
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_kind_follows_w(self):
        s = _state(self.rng, state_length(2))
        self.assertEqual(teacher_forward(toy_teacher(FULL), s).kind, FULL)
        diagonal = teacher_forward(toy_teacher(DIAGONAL), s)
        self.assertEqual(diagonal.kind, DIAGONAL)
        self.assertEqual(diagonal.values.shape, (2,))

    def test_state_length_checked(self):
        with self.assertRaises(ShapeMismatchException):
            teacher_forward(toy_teacher(), _state(self.rng, 3))

    def test_gradient_matches_central_differences(self):
        for kind in (FULL, DIAGONAL):
            params = toy_teacher(kind, seed=2, n_keys=3).to_param_vector()
            s = _state(self.rng, state_length(2))
            weights = tn.Tensor(self.rng.normal(size=(2, 2) if kind == FULL else (2,)))

            def f(p):
                phi = attention_coefficients(p["W"], p["V"], s)
                return tn.reduce_sum(tn.mul(phi, weights))

            analytic = grad(f, params)
            numeric = central_difference(lambda q: f(q.constants()).item(), params)
            self.assertLess(relative_error(analytic, numeric), 1e-6, kind)


class TestTeacherParams(unittest.TestCase):
    def test_shapes_validated(self):
        with self.assertRaises(ShapeMismatchException):
            TeacherParams(np.zeros((2, 3, 4)), np.zeros((4, 5)))
        with self.assertRaises(ShapeMismatchException):
            TeacherParams(np.zeros((2, 2, 4)), np.zeros((3, 5)))
        with self.assertRaises(ShapeMismatchException):
            TeacherParams(np.zeros(4), np.zeros((4, 5)))

    def test_param_vector_conversion(self):
        theta = toy_teacher()
        params = theta.to_param_vector()
        self.assertEqual(params.names, ["W", "V"])
        back = TeacherParams.from_param_vector(params)
        np.testing.assert_array_equal(back.W, theta.W)
        np.testing.assert_array_equal(back.V, theta.V)

    def test_init_is_near_identity(self):
        theta = init_teacher(3, state_length(3), n_keys=4, seed=1)
        self.assertEqual(theta.W.shape, (3, 3, 4))
        self.assertEqual(theta.V.shape, (4, 6))
        for k in range(4):
            np.testing.assert_allclose(theta.W[:, :, k], np.eye(3), rtol=0, atol=0.01)
        diagonal = init_teacher(3, state_length(3), n_keys=4, kind=DIAGONAL, seed=1)
        self.assertEqual(diagonal.W.shape, (3, 4))
        np.testing.assert_allclose(diagonal.W, np.ones((3, 4)), rtol=0, atol=0.01)

    def test_init_is_seeded(self):
        a = init_teacher(2, 5, seed=4)
        b = init_teacher(2, 5, seed=4)
        c = init_teacher(2, 5, seed=5)
        self.assertTrue(np.array_equal(a.V, b.V) and np.array_equal(a.W, b.W))
        self.assertFalse(np.array_equal(a.V, c.V))


class TestFeaturizeState(unittest.TestCase):
    def test_layout(self):
        s = featurize_state(5, 20, 0.5, 0.75, [1.0, 0.25])
        np.testing.assert_array_equal(s.values, [0.25, 0.5, 0.75, 1.0, 0.25])
        self.assertEqual(len(s), state_length(2))

    def test_zero_horizon(self):
        self.assertEqual(featurize_state(0, 0, 0.5, 0.5, [0.5, 0.5]).values[0], 0.0)

    def test_rejects_bad_states(self):
        with self.assertRaises(InvalidStateException):
            featurize_state(6, 5, 0.5, 0.5, [0.5, 0.5])
        with self.assertRaises(InvalidStateException):
            featurize_state(1, 5, 1.5, 0.5, [0.5, 0.5])
        with self.assertRaises(InvalidStateException):
            StateVector(np.zeros((2, 2)))


class TestTeacherCheckpoint(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "teacher.ckpt")

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_and_load(self):
        for kind in (FULL, DIAGONAL):
            theta = toy_teacher(kind, seed=9)
            save_teacher(self.path, theta)
            loaded = load_teacher(self.path)
            self.assertEqual(loaded.kind, kind)
            self.assertTrue(loaded.to_param_vector().array_equal(theta.to_param_vector()))

    def test_rejects_other_segments(self):
        checkpoint.save_param_vector(self.path, ParamVector({"w0": np.zeros((2, 2))}))
        with self.assertRaises(CheckpointFormatException):
            load_teacher(self.path)

    def test_rejects_inconsistent_shapes(self):
        params = ParamVector([("W", np.zeros((2, 2, 3))), ("V", np.zeros((4, 5)))])
        checkpoint.save_param_vector(self.path, params)
        with self.assertRaises(CheckpointFormatException):
            load_teacher(self.path)


if __name__ == "__main__":
    unittest.main()
