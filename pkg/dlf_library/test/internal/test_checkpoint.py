#!/usr/bin/env python3
import os
import struct
import tempfile
import unittest

import numpy as np

from dlf_library.internal.checkpoint import (
    CheckpointFormatException,
    decode_param_vector,
    encode_param_vector,
    load_param_vector,
    save_param_vector,
)
from dlf_library.internal.param_vector import ParamVector


class TestCheckpoint(unittest.TestCase):
    def setUp(self):
        self.params = ParamVector(
            [("W", np.arange(6.0).reshape(1, 2, 3)), ("V", np.array([[0.5]]))]
        )

    def test_layout(self):
        payload = encode_param_vector(self.params)
        expected = (
            b"DLF1"
            + struct.pack("<I", 2)
            + struct.pack("<I", 1)
            + b"W"
            + struct.pack("<4I", 3, 1, 2, 3)
            + struct.pack("<I", 1)
            + b"V"
            + struct.pack("<3I", 2, 1, 1)
            + struct.pack("<7d", 0, 1, 2, 3, 4, 5, 0.5)
        )
        self.assertEqual(payload, expected)

    def test_decode_inverts_encode(self):
        decoded = decode_param_vector(encode_param_vector(self.params))
        self.assertTrue(decoded.array_equal(self.params))

    def test_bad_magic(self):
        payload = b"DLF2" + encode_param_vector(self.params)[4:]
        with self.assertRaises(CheckpointFormatException):
            decode_param_vector(payload)

    def test_truncated_values(self):
        with self.assertRaises(CheckpointFormatException):
            decode_param_vector(encode_param_vector(self.params)[:-1])

    def test_trailing_bytes(self):
        with self.assertRaises(CheckpointFormatException):
            decode_param_vector(encode_param_vector(self.params) + b"\0")

    def test_segment_name_not_utf8(self):
        payload = bytearray(encode_param_vector(self.params))
        self.assertEqual(payload[12:13], b"W")
        payload[12] = 0xFF
        with self.assertRaises(CheckpointFormatException) as ctx:
            decode_param_vector(bytes(payload), "bad.ckpt")
        self.assertIn("not utf-8 at byte offset 12", str(ctx.exception))

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "teacher.ckpt")
            save_param_vector(path, self.params)
            self.assertTrue(load_param_vector(path).array_equal(self.params))


if __name__ == "__main__":
    unittest.main()
