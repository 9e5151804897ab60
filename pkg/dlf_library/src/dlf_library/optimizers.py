# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dataclasses import dataclass, replace

import numpy as np

from dlf_library.internal.param_vector import ParamVector


@dataclass(frozen=True)
class AdamState:
    step_count: int
    m: ParamVector
    v: ParamVector
    alpha: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, params, alpha=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(0, params.zeros_like(), params.zeros_like(), alpha, beta1, beta2, eps)


def adam_step(theta, grad, state):
    """One bias-corrected Adam descent step on theta.

    Returns (new_theta, new_state); the inputs are not modified.
    """
    theta.check_structure(grad, "adam gradient")
    theta.check_structure(state.m, "adam moments")
    step = state.step_count + 1
    m = state.m * state.beta1 + grad * (1.0 - state.beta1)
    v = ParamVector(
        (n, state.beta2 * vv + (1.0 - state.beta2) * np.square(grad[n]))
        for n, vv in state.v.items()
    )
    correction1 = 1.0 - state.beta1**step
    correction2 = 1.0 - state.beta2**step
    updated = ParamVector(
        (
            n,
            p - state.alpha * (m[n] / correction1) / (np.sqrt(v[n] / correction2) + state.eps),
        )
        for n, p in theta.items()
    )
    return updated, replace(state, step_count=step, m=m, v=v)


def sgd_update(omega, direction, eta):
    """omega - eta * direction; the single update rule both the recorded and
    the baseline student training use"""
    return omega - direction * eta
