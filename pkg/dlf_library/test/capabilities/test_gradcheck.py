#!/usr/bin/env python3
import json
import os
import tempfile
import unittest

from run_fixtures import make_protocol, records, toy_run, write_config

from dlf_library.protocol import EXIT_CONFIG, EXIT_GRADCHECK, EXIT_OK, RESOLVED_CONFIG_FILE
from dlf_library.teacher import init_teacher, save_teacher


class TestGradcheck(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, "out")

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, doc):
        proto, stream = make_protocol()
        message = {"op": "gradcheck", "config": write_config(self.tmp.name, doc)}
        return proto.incoming(json.loads(json.dumps(message))), records(stream)

    def test_toy_problem_passes(self):
        code, sent = self.run_command(toy_run(self.out))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(
            set(sent[0]), {"max_rel_error", "cosine", "hypergradient_norm", "oracle_norm"}
        )
        self.assertLessEqual(sent[0]["max_rel_error"], 1e-3)
        self.assertGreaterEqual(sent[0]["cosine"], 0.999)
        with open(os.path.join(self.out, RESOLVED_CONFIG_FILE)) as f:
            self.assertEqual(json.load(f)["gradcheck"]["coord_floor"], 1e-8)

    def test_diagonal_family_passes(self):
        code, _ = self.run_command(toy_run(self.out, loss={"family": "diagonal"}))
        self.assertEqual(code, EXIT_OK)

    def test_checkpointed_teacher(self):
        path = os.path.join(self.tmp.name, "teacher.ckpt")
        save_teacher(path, init_teacher(2, 5, n_keys=2, seed=5))
        code, _ = self.run_command(toy_run(self.out, teacher={"checkpoint": path}))
        self.assertEqual(code, EXIT_OK)

    def test_zero_horizon_passes(self):
        code, sent = self.run_command(toy_run(self.out, inner={"T": 0}))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(sent[0]["hypergradient_norm"], 0.0)
        self.assertEqual(sent[0]["oracle_norm"], 0.0)

    def test_flipped_reverse_rates_fail(self):
        code, sent = self.run_command(toy_run(self.out, gradcheck={"reverse_eta_sign": -1}))
        self.assertEqual(code, EXIT_GRADCHECK)
        self.assertLess(sent[0]["cosine"], 0.999)

    def test_mismatched_checkpoint_is_a_config_error(self):
        path = os.path.join(self.tmp.name, "teacher.ckpt")
        save_teacher(path, init_teacher(3, 6, n_keys=2))
        code, sent = self.run_command(toy_run(self.out, teacher={"checkpoint": path}))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertEqual(sent, [])
        self.assertFalse(os.path.exists(self.out))

    def test_fixed_family_is_a_config_error(self):
        code, sent = self.run_command(toy_run(self.out, loss={"family": "cross-entropy"}))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertEqual(sent, [])


if __name__ == "__main__":
    unittest.main()
