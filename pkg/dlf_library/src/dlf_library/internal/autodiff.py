# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import numpy as np

from dlf_library.internal.exceptions import ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector
from dlf_library.internal import tensor as tn

""" Reverse-mode differentiation over recorded Tensor graphs.

A scalar function here is any callable taking one or two mappings of
segment name -> Tensor (built from a ParamVector) and returning a Tensor with
a single element.  Gradients come back as ParamVectors with the structure of
the differentiation variable.

Hessian-vector products use the identity
    (d^2 f / dx dy) v = d(<df/dy, v>)/dx
with v held constant, so no Hessian is ever formed.
"""


def _toposort(root):
    """Nodes reachable from root through recorded parents, parents first"""
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backpropagate(output, inputs):
    """Returns d(output)/d(input) for each input Tensor.

    The returned gradients are themselves recorded Tensors, so they can be
    differentiated again.  Inputs that output does not depend on get zeros.

    Keyword arguments:
    output -- a single-element Tensor
    inputs -- a list of leaf Tensors

    """
    if output.size != 1:
        raise ShapeMismatchException("scalar function output", (), output.shape)
    grads = {id(output): tn.Tensor(np.ones(output.shape))}
    if output.requires_grad:
        for node in reversed(_toposort(output)):
            g = grads.get(id(node))
            if g is None or node._backward is None:
                continue
            for parent, parent_grad in zip(node._parents, node._backward(g)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else tn.add(grads[key], parent_grad)
    result = []
    for x in inputs:
        g = grads.get(id(x))
        result.append(tn.Tensor(np.zeros(x.shape)) if g is None else g)
    return result


def _evaluate(f, *args):
    out = f(*args)
    if not isinstance(out, tn.Tensor):
        out = tn.as_tensor(out)
    if out.size != 1:
        raise ShapeMismatchException("scalar function output", (), out.shape)
    return tn.reshape(out, ())


def _to_param_vector(names, tensors):
    return ParamVector((n, t.data) for n, t in zip(names, tensors))


def _inner_product(grads, v, names):
    """sum_i <grads_i, v_i> with v held constant"""
    total = None
    for g, name in zip(grads, names):
        term = tn.reduce_sum(tn.mul(g, tn.Tensor(v[name])))
        total = term if total is None else tn.add(total, term)
    return total if total is not None else tn.Tensor(0.0)


def value_and_grad(f, x):
    """Returns (f(x), df/dx) for a scalar function of one ParamVector"""
    leaves = x.leaves()
    out = _evaluate(f, leaves)
    grads = backpropagate(out, list(leaves.values()))
    return out.item(), _to_param_vector(x.names, grads)


def grad(f, x):
    """df/dx with the segment structure of x"""
    return value_and_grad(f, x)[1]


def hvp(f, x, v):
    """(d^2 f / dx^2) v, the gradient of <grad(f, x), v> with v constant"""
    x.check_structure(v, "hvp direction")
    leaves = x.leaves()
    inputs = list(leaves.values())
    first = backpropagate(_evaluate(f, leaves), inputs)
    second = backpropagate(_inner_product(first, v, x.names), inputs)
    return _to_param_vector(x.names, second)


def hvp_cross(f, a, b, v):
    """(d^2 f / da db) v for f(a, b), with v structured like b"""
    return joint_hvp(f, a, b, v)[0]


def joint_hvp(f, a, b, v):
    """Both (d^2 f / da db) v and (d^2 f / db^2) v from a single
    double-backward pass over f(a, b).

    Returns a tuple (cross, hessian) shaped like (a, b).
    """
    b.check_structure(v, "hvp direction")
    a_leaves = a.leaves()
    b_leaves = b.leaves()
    a_inputs = list(a_leaves.values())
    b_inputs = list(b_leaves.values())
    first = backpropagate(_evaluate(f, a_leaves, b_leaves), b_inputs)
    second = backpropagate(_inner_product(first, v, b.names), a_inputs + b_inputs)
    return (
        _to_param_vector(a.names, second[: len(a_inputs)]),
        _to_param_vector(b.names, second[len(a_inputs) :]),
    )
