# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import struct

import numpy as np

from dlf_library.internal.exceptions import DlfException
from dlf_library.internal.param_vector import ParamVector

""" The teacher.ckpt layout, all integers little-endian uint32:

    "DLF1" | n_segments
    per segment: name_len | name (utf-8) | ndim | dims...
    then every segment's values as little-endian float64, in segment order
"""

CHECKPOINT_MAGIC = b"DLF1"

_LE32 = struct.Struct("<I")


class CheckpointFormatException(DlfException):
    def __init__(self, source, offset, reason):
        DlfException.__init__(self, f"{source}: {reason} at byte offset {offset}")


def encode_param_vector(params):
    parts = [CHECKPOINT_MAGIC, _LE32.pack(len(params))]
    for name, values in params.items():
        encoded = name.encode("utf-8")
        parts.append(_LE32.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_LE32.pack(values.ndim))
        parts.extend(_LE32.pack(d) for d in values.shape)
    parts.append(params.flatten().astype("<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, payload, source):
        self.payload = payload
        self.source = source
        self.offset = 0

    def take(self, n, what):
        if self.offset + n > len(self.payload):
            raise CheckpointFormatException(self.source, self.offset, f"truncated {what}")
        chunk = self.payload[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def uint32(self, what):
        return _LE32.unpack(self.take(_LE32.size, what))[0]


def decode_param_vector(payload, source="<checkpoint>"):
    reader = _Reader(payload, source)
    if reader.take(4, "magic") != CHECKPOINT_MAGIC:
        raise CheckpointFormatException(source, 0, "bad magic")
    layout = []
    for _ in range(reader.uint32("segment count")):
        length = reader.uint32("name length")
        start = reader.offset
        try:
            name = reader.take(length, "segment name").decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointFormatException(source, start, "segment name is not utf-8")
        ndim = reader.uint32("ndim")
        layout.append((name, tuple(reader.uint32("dimension") for _ in range(ndim))))
    total = int(sum(int(np.prod(shape, dtype=np.int64)) for _, shape in layout))
    values = np.frombuffer(reader.take(8 * total, "values"), dtype="<f8").astype(np.float64)
    if reader.offset != len(payload):
        raise CheckpointFormatException(source, reader.offset, "trailing bytes")
    template = ParamVector((name, np.zeros(shape)) for name, shape in layout)
    return template.unflatten(values)


def save_param_vector(path, params):
    with open(path, "wb") as f:
        f.write(encode_param_vector(params))


def load_param_vector(path):
    with open(path, "rb") as f:
        return decode_param_vector(f.read(), str(path))
