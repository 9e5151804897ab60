# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import numpy as np

from dlf_library.internal.exceptions import NumericalOverflowException, ShapeMismatchException

""" Dense float64 tensors that record the operations applied to them.

Every operation below registers a backward rule, and every backward rule is
written in terms of the same operations.  Differentiating a gradient therefore
works the same way as differentiating a loss, which is what the hessian-vector
products in autodiff rely on.

A Tensor created with requires_grad=False (a constant) never records parents,
so graphs only grow along paths that lead back to differentiation variables.
"""

LOG_CLAMP = 1e-300


class Tensor:
    __slots__ = ("data", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.op = "leaf"
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def T(self):
        return transpose(self)

    def item(self):
        return float(self.data.reshape(()))

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, reciprocal(other))
        return mul(self, 1.0 / other)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _result(op, data, parents, backward):
    """Wraps data in a Tensor, attaching the backward rule when any parent
    requires a gradient"""
    if not np.all(np.isfinite(data)):
        raise NumericalOverflowException(op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.op = op
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = parents
        out._backward = backward
    else:
        out._parents = ()
        out._backward = None
    return out


# Shape plumbing


def reshape(a, shape):
    a = as_tensor(a)
    shape = tuple(shape)
    if a.shape == shape:
        return a
    return _result(
        "reshape", a.data.reshape(shape), (a,), lambda g: (reshape(g, a.shape),)
    )


def transpose(a):
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeMismatchException("transpose", ("m", "n"), a.shape)
    return _result("transpose", a.data.T.copy(), (a,), lambda g: (transpose(g),))


def broadcast_to(a, shape):
    a = as_tensor(a)
    shape = tuple(shape)
    if a.shape == shape:
        return a
    data = np.array(np.broadcast_to(a.data, shape))
    return _result("broadcast_to", data, (a,), lambda g: (sum_to(g, a.shape),))


def sum_to(a, shape):
    """Sums a broadcast result back down to shape"""
    a = as_tensor(a)
    shape = tuple(shape)
    if a.shape == shape:
        return a
    lead = a.ndim - len(shape)
    axes = tuple(range(lead)) + tuple(
        lead + i for i, n in enumerate(shape) if n == 1 and a.shape[lead + i] != 1
    )
    data = np.sum(a.data, axis=axes, keepdims=True).reshape(shape)
    return _result("sum_to", data, (a,), lambda g: (broadcast_to(g, a.shape),))


def reduce_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    data = np.sum(a.data, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            kept = (1,) * a.ndim
        else:
            kept = list(a.shape)
            kept[axis] = 1
        return (broadcast_to(reshape(g, kept), a.shape),)

    return _result("sum", np.asarray(data, dtype=np.float64), (a,), backward)


def mean(a):
    a = as_tensor(a)
    return mul(reduce_sum(a), 1.0 / a.size)


# Arithmetic


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _result(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (sum_to(g, a.shape), sum_to(g, b.shape)),
    )


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _result(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (sum_to(g, a.shape), neg(sum_to(g, b.shape))),
    )


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _result(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (sum_to(mul(g, b), a.shape), sum_to(mul(g, a), b.shape)),
    )


def neg(a):
    a = as_tensor(a)
    return _result("neg", -a.data, (a,), lambda g: (neg(g),))


def reciprocal(a):
    a = as_tensor(a)
    with np.errstate(divide="ignore", over="ignore"):
        data = 1.0 / a.data
    out = _result("reciprocal", data, (a,), lambda g: (neg(mul(g, mul(out, out))),))
    return out


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 2 and b.ndim == 2:
        if a.shape[1] != b.shape[0]:
            raise ShapeMismatchException("matmul", (a.shape[0], b.shape[0]), a.shape)

        def backward(g):
            return matmul(g, transpose(b)), matmul(transpose(a), g)

    elif a.ndim == 2 and b.ndim == 1:
        if a.shape[1] != b.shape[0]:
            raise ShapeMismatchException("matmul", (a.shape[0], b.shape[0]), a.shape)
        m, n = a.shape

        def backward(g):
            return matmul(reshape(g, (m, 1)), reshape(b, (1, n))), matmul(transpose(a), g)

    elif a.ndim == 1 and b.ndim == 2:
        if a.shape[0] != b.shape[0]:
            raise ShapeMismatchException("matmul", (b.shape[0],), a.shape)
        n, m = b.shape

        def backward(g):
            return matmul(b, g), matmul(reshape(a, (n, 1)), reshape(g, (1, m)))

    else:
        raise ShapeMismatchException("matmul", ("m", "n"), a.shape)
    return _result("matmul", a.data @ b.data, (a, b), backward)


# Elementwise nonlinearities


def exp(a):
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        data = np.exp(a.data)
    out = _result("exp", data, (a,), lambda g: (mul(g, out),))
    return out


def clamp_min(a, lower):
    """max(a, lower); the gradient is passed through only where a >= lower"""
    a = as_tensor(a)
    mask = Tensor((a.data >= lower).astype(np.float64))
    return _result("clamp_min", np.maximum(a.data, lower), (a,), lambda g: (mul(g, mask),))


def _log_unclamped(a):
    with np.errstate(divide="ignore"):
        data = np.log(a.data)
    return _result("log", data, (a,), lambda g: (mul(g, reciprocal(a)),))


def log(a):
    """Natural log with inputs clamped at LOG_CLAMP"""
    return _log_unclamped(clamp_min(as_tensor(a), LOG_CLAMP))


def _stable_sigmoid(x):
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def sigmoid(a):
    a = as_tensor(a)
    out = _result(
        "sigmoid",
        _stable_sigmoid(a.data),
        (a,),
        lambda g: (mul(g, mul(out, sub(1.0, out))),),
    )
    return out


def log_sigmoid(a):
    """log(sigmoid(a)) evaluated as -log(1 + exp(-a))"""
    a = as_tensor(a)
    return _result(
        "log_sigmoid",
        -np.logaddexp(0.0, -a.data),
        (a,),
        lambda g: (mul(g, sigmoid(neg(a))),),
    )


def tanh(a):
    a = as_tensor(a)
    out = _result(
        "tanh", np.tanh(a.data), (a,), lambda g: (mul(g, sub(1.0, mul(out, out))),)
    )
    return out


def softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.data - np.max(a.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / np.sum(e, axis=axis, keepdims=True)
    out = _result(
        "softmax",
        data,
        (a,),
        lambda g: (mul(out, sub(g, reduce_sum(mul(g, out), axis=axis, keepdims=True))),),
    )
    return out


def log_softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.data - np.max(a.data, axis=axis, keepdims=True)
    data = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    out = _result(
        "log_softmax",
        data,
        (a,),
        lambda g: (sub(g, mul(exp(out), reduce_sum(g, axis=axis, keepdims=True))),),
    )
    return out


# Indexing


def index_select(a, indices):
    """Rows of a (first axis) at the given integer indices"""
    a = as_tensor(a)
    indices = np.asarray(indices, dtype=np.int64)
    return _result(
        "index_select",
        np.take(a.data, indices, axis=0),
        (a,),
        lambda g: (index_add(g, indices, a.shape[0]),),
    )


def index_add(a, indices, n_rows):
    """Adjoint of index_select: scatters the rows of a into n_rows rows"""
    a = as_tensor(a)
    indices = np.asarray(indices, dtype=np.int64)
    data = np.zeros((n_rows,) + a.shape[1:])
    np.add.at(data, indices, a.data)
    return _result("index_add", data, (a,), lambda g: (index_select(g, indices),))


def gather(a, columns):
    """a[i, columns[i]] for every row i of a 2-d tensor"""
    a = as_tensor(a)
    columns = np.asarray(columns, dtype=np.int64)
    rows = np.arange(a.shape[0])
    return _result(
        "gather",
        a.data[rows, columns],
        (a,),
        lambda g: (scatter(g, columns, a.shape),),
    )


def scatter(a, columns, shape):
    """Adjoint of gather: places a[i] at (i, columns[i]) of a zero tensor"""
    a = as_tensor(a)
    columns = np.asarray(columns, dtype=np.int64)
    data = np.zeros(shape)
    data[np.arange(shape[0]), columns] = a.data
    return _result("scatter", data, (a,), lambda g: (gather(g, columns),))
