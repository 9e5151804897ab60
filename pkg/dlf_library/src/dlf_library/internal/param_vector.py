# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import numpy as np

from dlf_library.internal.exceptions import (
    DuplicateSegmentException,
    ShapeMismatchException,
)
from dlf_library.internal.tensor import Tensor


class ParamVector:
    """An ordered set of named float64 arrays, treated as one flat vector.

    ParamVector is the currency of every gradient in the library: student
    weights, teacher weights and all their derivatives share this structure.
    Instances are plain values; arithmetic returns new instances.

    """

    __slots__ = ("_segments",)

    def __init__(self, segments):
        """Keyword arguments:
        segments -- an iterable of (name, array) pairs, or a mapping

        """
        if hasattr(segments, "items"):
            segments = segments.items()
        self._segments = {}
        for name, values in segments:
            if name in self._segments:
                raise DuplicateSegmentException(name)
            self._segments[name] = np.array(values, dtype=np.float64)

    @property
    def names(self):
        return list(self._segments)

    @property
    def shapes(self):
        return [v.shape for v in self._segments.values()]

    @property
    def total_len(self):
        return int(np.sum([v.size for v in self._segments.values()], dtype=np.int64))

    def __getitem__(self, name):
        return self._segments[name]

    def __iter__(self):
        return iter(self._segments)

    def __len__(self):
        return len(self._segments)

    def items(self):
        return self._segments.items()

    def __repr__(self):
        parts = ", ".join(f"{n}{tuple(v.shape)}" for n, v in self._segments.items())
        return f"ParamVector({parts})"

    def flatten(self):
        if not self._segments:
            return np.zeros(0)
        return np.concatenate([v.ravel() for v in self._segments.values()])

    def unflatten(self, flat):
        """Returns a ParamVector with this structure holding the values of flat"""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.total_len,):
            raise ShapeMismatchException("unflatten", (self.total_len,), flat.shape)
        pieces = []
        offset = 0
        for name, values in self._segments.items():
            pieces.append((name, flat[offset : offset + values.size].reshape(values.shape)))
            offset += values.size
        return ParamVector(pieces)

    def check_structure(self, other, context="ParamVector"):
        if self.names != other.names:
            raise ShapeMismatchException(context, self.names, other.names)
        for name in self._segments:
            if self[name].shape != other[name].shape:
                raise ShapeMismatchException(
                    f"{context} segment {name}", self[name].shape, other[name].shape
                )

    def same_structure(self, other):
        return self.names == other.names and self.shapes == other.shapes

    def zeros_like(self):
        return ParamVector((n, np.zeros_like(v)) for n, v in self._segments.items())

    def copy(self):
        return ParamVector(self._segments.items())

    def leaves(self):
        """Differentiation variables, one Tensor per segment"""
        return {n: Tensor(v, requires_grad=True) for n, v in self._segments.items()}

    def constants(self):
        return {n: Tensor(v) for n, v in self._segments.items()}

    def _combine(self, other, fn):
        self.check_structure(other)
        return ParamVector((n, fn(v, other[n])) for n, v in self._segments.items())

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return ParamVector((n, v * scalar) for n, v in self._segments.items())

    __rmul__ = __mul__

    def __neg__(self):
        return ParamVector((n, -v) for n, v in self._segments.items())

    def dot(self, other):
        self.check_structure(other)
        return float(np.dot(self.flatten(), other.flatten()))

    def norm(self):
        return float(np.linalg.norm(self.flatten()))

    def array_equal(self, other):
        """Bitwise equality of structure and values"""
        return self.same_structure(other) and all(
            np.array_equal(v, other[n]) for n, v in self._segments.items()
        )
