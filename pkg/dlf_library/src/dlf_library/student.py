# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dataclasses import dataclass

import numpy as np

from dlf_library.internal import tensor as tn
from dlf_library.internal.exceptions import InvalidArgumentException, ShapeMismatchException
from dlf_library.internal.param_vector import ParamVector

# Hidden nonlinearities must be twice differentiable along the whole trajectory
ACTIVATIONS = {"tanh": tn.tanh, "sigmoid": tn.sigmoid}


def _weight_name(layer):
    return "w%d" % layer


def _bias_name(layer):
    return "b%d" % layer


@dataclass(frozen=True, eq=False)
class MlpStudent:
    """A multi-layer perceptron classifier f_omega ending in a softmax.

    omega holds segments w0, b0, w1, b1, ... where w<i> has shape
    (layer_sizes[i], layer_sizes[i + 1]) and b<i> has shape (layer_sizes[i + 1],).

    """

    layer_sizes: tuple
    omega: ParamVector
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise InvalidArgumentException("a student needs at least input and output sizes")
        if self.activation not in ACTIVATIONS:
            raise InvalidArgumentException(f"unknown activation '{self.activation}'")
        self.omega.check_structure(_template(self.layer_sizes), "student omega")

    @property
    def n_classes(self):
        return self.layer_sizes[-1]

    @property
    def input_dim(self):
        return self.layer_sizes[0]


def _template(layer_sizes):
    segments = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        segments.append((_weight_name(i), np.zeros((fan_in, fan_out))))
        segments.append((_bias_name(i), np.zeros(fan_out)))
    return ParamVector(segments)


def glorot_uniform(rng, fan_in, fan_out, shape=None):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def init_student(layer_sizes, seed, activation="tanh"):
    """Seeded Glorot-uniform weights and zero biases"""
    rng = np.random.default_rng(seed)
    segments = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        segments.append((_weight_name(i), glorot_uniform(rng, fan_in, fan_out)))
        segments.append((_bias_name(i), np.zeros(fan_out)))
    return MlpStudent(tuple(layer_sizes), ParamVector(segments), activation)


def student_probs(params, inputs, activation="tanh"):
    """Differentiable forward pass.

    Keyword arguments:
    params     -- mapping of segment name to Tensor (see MlpStudent)
    inputs     -- (B, input_dim) array or Tensor
    activation -- hidden nonlinearity name

    Returns the (B, |Y|) probability Tensor
    """
    n_layers = len(params) // 2
    h = tn.as_tensor(inputs)
    if h.ndim != 2 or h.shape[1] != params[_weight_name(0)].shape[0]:
        raise ShapeMismatchException(
            "student inputs", ("B", params[_weight_name(0)].shape[0]), h.shape
        )
    act = ACTIVATIONS[activation]
    for i in range(n_layers):
        h = tn.add(tn.matmul(h, params[_weight_name(i)]), params[_bias_name(i)])
        if i < n_layers - 1:
            h = act(h)
    return tn.softmax(h, axis=1)


def forward_probs(student, batch_inputs):
    """Probabilities of student on a batch, as a constant Tensor"""
    return student_probs(student.omega.constants(), batch_inputs, student.activation)


def predict(probs):
    """argmax per row; ties go to the lowest class index"""
    probs = probs.data if isinstance(probs, tn.Tensor) else np.asarray(probs)
    return np.argmax(probs, axis=1)


def accuracy(preds, labels):
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ShapeMismatchException("accuracy", labels.shape, preds.shape)
    if preds.size == 0:
        return 0.0
    return float(np.mean(preds == labels))


def per_class_precision(preds, labels, n_classes):
    """Correct predictions of class c over all predictions of class c; 0 for a
    class that is never predicted"""
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    predicted = np.bincount(preds, minlength=n_classes)[:n_classes].astype(np.float64)
    correct = np.bincount(preds[preds == labels], minlength=n_classes)[:n_classes]
    precision = np.zeros(n_classes)
    seen = predicted > 0
    precision[seen] = correct[seen] / predicted[seen]
    return precision
