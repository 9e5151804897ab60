# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import gzip
import struct

import numpy as np

from dlf_library.internal.exceptions import DlfException

""" Reader and writer for the IDX files the MNIST distribution ships in.

All header fields are big-endian 32-bit integers:

    labels:  0x00000801 | count | count unsigned bytes
    images:  0x00000803 | count | rows | cols | count*rows*cols unsigned bytes

Paths ending in .gz are read and written gzip-compressed.
"""

IDX_LABELS_MAGIC = 0x00000801
IDX_IMAGES_MAGIC = 0x00000803

_BE32 = struct.Struct(">I")


class IdxFormatException(DlfException):
    def __init__(self, source, offset, reason):
        self.source = source
        self.offset = offset
        self.reason = reason
        DlfException.__init__(self, f"{source}: {reason} at byte offset {offset}")


def _read_header(payload, fields, source):
    needed = _BE32.size * fields
    if len(payload) < needed:
        raise IdxFormatException(source, len(payload), "truncated header")
    return [_BE32.unpack_from(payload, i * _BE32.size)[0] for i in range(fields)]


def read_idx_labels(payload, source="<labels>"):
    """Returns the labels of an IDX label file as an int64 array"""
    magic, count = _read_header(payload, 2, source)
    if magic != IDX_LABELS_MAGIC:
        raise IdxFormatException(source, 0, "bad magic 0x%08x" % magic)
    start = 2 * _BE32.size
    if len(payload) < start + count:
        raise IdxFormatException(source, len(payload), "truncated payload")
    return np.frombuffer(payload, dtype=np.uint8, count=count, offset=start).astype(np.int64)


def read_idx_images(payload, source="<images>"):
    """Returns the images of an IDX image file as a (count, rows, cols) uint8 array"""
    magic, count, rows, cols = _read_header(payload, 4, source)
    if magic != IDX_IMAGES_MAGIC:
        raise IdxFormatException(source, 0, "bad magic 0x%08x" % magic)
    start = 4 * _BE32.size
    size = count * rows * cols
    if len(payload) < start + size:
        raise IdxFormatException(source, len(payload), "truncated payload")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=size, offset=start)
    return pixels.reshape(count, rows, cols).copy()


def write_idx_labels(labels):
    labels = np.asarray(labels)
    header = _BE32.pack(IDX_LABELS_MAGIC) + _BE32.pack(len(labels))
    return header + labels.astype(np.uint8).tobytes()


def write_idx_images(images):
    """Encodes a (count, rows, cols) array of bytes"""
    images = np.asarray(images)
    count, rows, cols = images.shape
    header = b"".join(_BE32.pack(v) for v in (IDX_IMAGES_MAGIC, count, rows, cols))
    return header + images.astype(np.uint8).tobytes()


def read_idx_count(path, magic):
    """Example count from the header of an IDX file; the payload is not read"""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as f:
        head = f.read(2 * _BE32.size)
    found, count = _read_header(head, 2, str(path))
    if found != magic:
        raise IdxFormatException(str(path), 0, "bad magic 0x%08x" % found)
    return count


def read_file(path):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def write_file(path, payload):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as f:
        f.write(payload)
