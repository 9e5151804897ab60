# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dataclasses import dataclass

import numpy as np

from dlf_library.internal import checkpoint
from dlf_library.internal import tensor as tn
from dlf_library.internal.checkpoint import CheckpointFormatException
from dlf_library.internal.exceptions import InvalidStateException, ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector
from dlf_library.losses import DIAGONAL, FULL, LossCoefficients
from dlf_library.student import glorot_uniform

# Scale of the Glorot noise added to the identity slices of W at init
W_INIT_NOISE = 0.01


def state_length(n_classes):
    return 3 + n_classes


@dataclass(frozen=True, eq=False)
class TeacherParams:
    """theta of the attention teacher Phi = W softmax(V s).

    W has shape (|Y|, |Y|, N) for the full-matrix family or (|Y|, N) for the
    diagonal family; V has shape (N, |s|).
    """

    W: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64)
        V = np.array(self.V, dtype=np.float64)
        if W.ndim not in (2, 3) or (W.ndim == 3 and W.shape[0] != W.shape[1]):
            raise ShapeMismatchException("teacher W", ("Y", "Y", "N"), W.shape)
        if V.ndim != 2 or V.shape[0] != W.shape[-1]:
            raise ShapeMismatchException("teacher V", (W.shape[-1], "S"), V.shape)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)

    @property
    def n_keys(self):
        return self.V.shape[0]

    @property
    def n_classes(self):
        return self.W.shape[0]

    @property
    def state_len(self):
        return self.V.shape[1]

    @property
    def kind(self):
        return FULL if self.W.ndim == 3 else DIAGONAL

    def to_param_vector(self):
        return ParamVector([("W", self.W), ("V", self.V)])

    @classmethod
    def from_param_vector(cls, params):
        return cls(params["W"], params["V"])


@dataclass(frozen=True, eq=False)
class StateVector:
    """s_t: normalized step, train accuracy, dev accuracy and the per-class dev
    precisions, every entry in [0, 1]"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise InvalidStateException("state must be a vector, got shape %s" % (values.shape,))
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise InvalidStateException("state entries must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]


def featurize_state(t, T, train_acc, dev_acc, dev_precisions):
    """Builds s_t = [t/T, train_acc, dev_acc, precisions...].  With T=0 the
    step feature is 0."""
    if t < 0 or t > T:
        raise InvalidStateException("step %d is outside [0, %d]" % (t, T))
    progress = t / T if T > 0 else 0.0
    return StateVector(np.concatenate([[progress, train_acc, dev_acc], dev_precisions]))


def init_teacher(n_classes, state_len, n_keys=10, kind=FULL, seed=0):
    """Each W slice starts at the identity (ones for the diagonal kind) plus
    small Glorot noise, so step 0 behaves like a squashed cross-entropy"""
    rng = np.random.default_rng(seed)
    if kind == FULL:
        base = np.repeat(np.eye(n_classes)[:, :, None], n_keys, axis=2)
        noise = glorot_uniform(rng, n_classes * n_classes, n_keys, (n_classes, n_classes, n_keys))
    else:
        base = np.ones((n_classes, n_keys))
        noise = glorot_uniform(rng, n_classes, n_keys)
    W = base + W_INIT_NOISE * noise
    V = glorot_uniform(rng, state_len, n_keys, (n_keys, state_len))
    return TeacherParams(W, V)


def attention_coefficients(W, V, state):
    """Differentiable Phi = sum_k softmax(V s)_k W[..., k].

    Keyword arguments:
    W     -- Tensor (|Y|, |Y|, N) or (|Y|, N)
    V     -- Tensor (N, |s|)
    state -- StateVector, held constant

    """
    s = np.asarray(state.values if isinstance(state, StateVector) else state)
    if s.shape != (V.shape[1],):
        raise ShapeMismatchException("teacher state", (V.shape[1],), s.shape)
    attention = tn.softmax(tn.matmul(V, tn.Tensor(s)), axis=0)
    n_keys = W.shape[-1]
    if W.ndim == 3:
        n = W.shape[0]
        flat = tn.reshape(W, (n * n, n_keys))
        return tn.reshape(tn.matmul(flat, attention), (n, n))
    return tn.matmul(W, attention)


def teacher_forward(theta, s):
    """Phi_t = mu_theta(s_t) for TeacherParams or a mapping of W/V Tensors"""
    if isinstance(theta, TeacherParams):
        kind = theta.kind
        W, V = tn.Tensor(theta.W), tn.Tensor(theta.V)
    else:
        W, V = theta["W"], theta["V"]
        kind = FULL if W.ndim == 3 else DIAGONAL
    return LossCoefficients(kind, attention_coefficients(W, V, s))


def save_teacher(path, theta):
    checkpoint.save_param_vector(path, theta.to_param_vector())


def load_teacher(path):
    """Reads a DLF1 checkpoint holding the W and V segments; the coefficient
    kind follows from the rank of W"""
    params = checkpoint.load_param_vector(path)
    if params.names != ["W", "V"]:
        reason = "expected segments W, V, got %s" % params.names
        raise CheckpointFormatException(str(path), 4, reason)
    try:
        return TeacherParams.from_param_vector(params)
    except ShapeMismatchException as e:
        raise CheckpointFormatException(str(path), 4, str(e))
