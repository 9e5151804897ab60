# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dataclasses import dataclass

import numpy as np

from dlf_library.internal import tensor as tn
from dlf_library.internal.exceptions import (
    InvalidArgumentException,
    InvalidLabelException,
    LossFamilyException,
    ShapeMismatchException,
)

""" Loss functions a student can be trained with.

All losses take the student's (B, |Y|) probabilities and integer labels and
return the batch mean as a scalar Tensor, differentiable in whatever the
probabilities (and the coefficients) were computed from.
"""

FULL = "full"
DIAGONAL = "diagonal"

BILINEAR = "bilinear"
DIAGONAL_FAMILY = "diagonal"
CROSS_ENTROPY = "cross-entropy"
SMOOTH01 = "smooth01"

LOSS_FAMILIES = (BILINEAR, DIAGONAL_FAMILY, CROSS_ENTROPY, SMOOTH01)
TEACHER_FAMILIES = {BILINEAR: FULL, DIAGONAL_FAMILY: DIAGONAL}

DEFAULT_SMOOTH_K = 50.0


@dataclass(frozen=True)
class LossCoefficients:
    """Phi_t: a |Y| x |Y| matrix (kind full) or |Y| vector (kind diagonal).

    values is a Tensor so the coefficients stay differentiable in the teacher
    parameters that produced them.
    """

    kind: str
    values: tn.Tensor

    def __post_init__(self):
        values = tn.as_tensor(self.values)
        object.__setattr__(self, "values", values)
        if self.kind == FULL:
            if values.ndim != 2 or values.shape[0] != values.shape[1]:
                raise ShapeMismatchException("full loss coefficients", ("Y", "Y"), values.shape)
        elif self.kind == DIAGONAL:
            if values.ndim != 1:
                raise ShapeMismatchException("diagonal loss coefficients", ("Y",), values.shape)
        else:
            raise InvalidArgumentException(f"unknown coefficient kind '{self.kind}'")

    @property
    def n_classes(self):
        return self.values.shape[0]

    def matrix(self):
        """Phi as a dense |Y| x |Y| array (diagonal kinds are expanded)"""
        if self.kind == DIAGONAL:
            return np.diag(self.values.data)
        return self.values.data.copy()


@dataclass(frozen=True)
class LossSpec:
    family: str
    smooth_k: float = None

    def __post_init__(self):
        if self.family not in LOSS_FAMILIES:
            raise LossFamilyException(self.family, "is not one of %s" % (LOSS_FAMILIES,))
        if self.family == SMOOTH01:
            if self.smooth_k is None or not self.smooth_k > 0:
                raise LossFamilyException(self.family, "needs a positive smooth_k")
        elif self.smooth_k is not None:
            raise LossFamilyException(self.family, "does not take smooth_k")

    @property
    def teacher_controlled(self):
        return self.family in TEACHER_FAMILIES

    @property
    def coefficient_kind(self):
        return TEACHER_FAMILIES.get(self.family)


def _check_labels(probs, labels):
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or labels.shape != (probs.shape[0],):
        raise ShapeMismatchException("loss labels", (probs.shape[0],), labels.shape)
    n_classes = probs.shape[1]
    bad = labels[(labels < 0) | (labels >= n_classes)]
    if bad.size:
        raise InvalidLabelException(int(bad[0]), n_classes)
    return labels


def cross_entropy_loss(probs, labels):
    """mean of -log p(y|x)"""
    probs = tn.as_tensor(probs)
    labels = _check_labels(probs, labels)
    return tn.neg(tn.mean(tn.log(tn.gather(probs, labels))))


def bilinear_loss(probs, labels, phi):
    """mean of -sigmoid(onehot(y)' Phi log p)"""
    probs = tn.as_tensor(probs)
    labels = _check_labels(probs, labels)
    if phi.kind != FULL or phi.values.shape != (probs.shape[1], probs.shape[1]):
        raise ShapeMismatchException(
            "bilinear loss coefficients", (probs.shape[1], probs.shape[1]), phi.values.shape
        )
    rows = tn.index_select(phi.values, labels)
    z = tn.reduce_sum(tn.mul(rows, tn.log(probs)), axis=1)
    return tn.neg(tn.mean(tn.sigmoid(z)))


def diagonal_loss(probs, labels, phi):
    """mean of -sigmoid(Phi_y log p(y|x))"""
    probs = tn.as_tensor(probs)
    labels = _check_labels(probs, labels)
    if phi.kind != DIAGONAL or phi.values.shape != (probs.shape[1],):
        raise ShapeMismatchException(
            "diagonal loss coefficients", (probs.shape[1],), phi.values.shape
        )
    z = tn.mul(tn.index_select(phi.values, labels), tn.log(tn.gather(probs, labels)))
    return tn.neg(tn.mean(tn.sigmoid(z)))


def smooth01_loss(probs, labels, k=DEFAULT_SMOOTH_K):
    """mean of -log sigmoid(k * (log p(y|x) - max_{y* != y} log p(y*|x)))

    The competitor is the hard max; ties resolve to the lowest class index.
    """
    probs = tn.as_tensor(probs)
    labels = _check_labels(probs, labels)
    if probs.shape[1] < 2:
        raise LossFamilyException(SMOOTH01, "needs at least two classes")
    if not k > 0:
        raise LossFamilyException(SMOOTH01, "needs a positive smooth_k")
    log_p = tn.log(probs)
    masked = log_p.data.copy()
    masked[np.arange(len(labels)), labels] = -np.inf
    rivals = np.argmax(masked, axis=1)
    margin = tn.sub(tn.gather(log_p, labels), tn.gather(log_p, rivals))
    return tn.neg(tn.mean(tn.log_sigmoid(tn.mul(margin, float(k)))))


def evaluate_loss(spec, probs, labels, phi=None):
    """Dispatches on spec.family; phi is required for teacher-controlled families"""
    if spec.teacher_controlled:
        if phi is None:
            raise LossFamilyException(spec.family, "needs loss coefficients")
        if spec.family == BILINEAR:
            return bilinear_loss(probs, labels, phi)
        return diagonal_loss(probs, labels, phi)
    if spec.family == CROSS_ENTROPY:
        return cross_entropy_loss(probs, labels)
    return smooth01_loss(probs, labels, spec.smooth_k)
