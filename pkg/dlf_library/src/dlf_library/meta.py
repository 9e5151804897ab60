# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from numbers import Real

import numpy as np

from dlf_library.data import make_schedule
from dlf_library.internal import tensor as tn
from dlf_library.internal.autodiff import grad, joint_hvp, value_and_grad
from dlf_library.internal.exceptions import (
    DlfException,
    InnerTrainingException,
    InvalidArgumentException,
    LossFamilyException,
    NumericalOverflowException,
    OracleDimensionException,
    ShapeMismatchException,
    TeacherStepException,
    TrajectoryMismatchException,
)
from dlf_library.losses import evaluate_loss
from dlf_library.optimizers import AdamState, adam_step, sgd_update
from dlf_library.student import (
    MlpStudent,
    accuracy,
    forward_probs,
    init_student,
    per_class_precision,
    predict,
    student_probs,
)
from dlf_library.teacher import (
    TeacherParams,
    featurize_state,
    init_teacher,
    state_length,
    teacher_forward,
)

""" The bilevel core.

inner_train runs plain SGD on the student under the teacher's loss and keeps
every intermediate omega.  rmd_hypergradient walks those snapshots backwards,
accumulating the derivative of the summed smoothed dev metric with respect to
the teacher parameters.  train_teacher alternates the two with Adam ascent on
theta, and fd_oracle is a brute-force central-difference check of the reverse
sweep.
"""

logger = logging.getLogger(__name__)

# Largest theta the finite-difference oracle will enumerate
FD_ORACLE_LIMIT = 256


@dataclass(frozen=True)
class MetaConfig:
    """Everything that determines an inner run and the outer loop around it.

    Keyword arguments:
    layer_sizes         -- student sizes, input dim first and n_classes last
    T                   -- inner SGD steps
    batch_size          -- examples per inner step
    eta                 -- a constant learning rate or ((start_step, eta), ...)
    teacher_steps       -- outer Adam steps of train_teacher
    train_acc_subsample -- size of the fixed train subset behind the train
                           accuracy feature (None for the full set)
    dev_grad_subsample  -- size of the dev subset the hypergradient is taken
                           on (None for the full dev set)
    reseed_students     -- draw a new omega_0 and batch order every teacher step

    """

    layer_sizes: tuple
    T: int = 0
    batch_size: int = 1
    eta: object = 0.1
    teacher_steps: int = 0
    activation: str = "tanh"
    student_seed: int = 0
    batch_seed: int = 0
    train_acc_subsample: int = 512
    subsample_seed: int = 0
    dev_grad_subsample: int = None
    n_keys: int = 10
    teacher_seed: int = 0
    adam_alpha: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    reseed_students: bool = False
    momentum: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        if not isinstance(self.eta, Real):
            object.__setattr__(self, "eta", tuple((int(s), float(e)) for s, e in self.eta))
        self.validate()

    def validate(self):
        if self.T < 0:
            raise InvalidArgumentException("must be >= 0", "T")
        if self.batch_size < 1:
            raise InvalidArgumentException("must be >= 1", "batch_size")
        if self.teacher_steps < 0:
            raise InvalidArgumentException("must be >= 0", "teacher_steps")
        if len(self.layer_sizes) < 2:
            raise InvalidArgumentException("needs input and output sizes", "layer_sizes")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidArgumentException("must lie in [0, 1)", "momentum")
        if not isinstance(self.eta, Real):
            starts = [s for s, _ in self.eta]
            if not starts or starts[0] != 0:
                raise InvalidArgumentException("a schedule must start at step 0", "eta")
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise InvalidArgumentException("schedule steps must increase", "eta")

    @property
    def n_classes(self):
        return self.layer_sizes[-1]

    def eta_at(self, t):
        if isinstance(self.eta, Real):
            return float(self.eta)
        current = self.eta[0][1]
        for start, eta in self.eta:
            if start > t:
                break
            current = eta
        return current


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """One recorded inner run.

    omegas holds the T + 1 snapshots omega_0..omega_T; states, batches and
    etas hold what step t consumed.
    """

    omegas: tuple
    states: tuple
    batches: tuple
    etas: tuple
    layer_sizes: tuple
    activation: str
    loss: object

    def __post_init__(self):
        T = len(self.states)
        if len(self.omegas) != T + 1 or len(self.batches) != T or len(self.etas) != T:
            raise TrajectoryMismatchException(
                "trajectory holds %d snapshots, %d states, %d batches and %d rates"
                % (len(self.omegas), T, len(self.batches), len(self.etas))
            )

    @property
    def T(self):
        return len(self.states)

    def student(self, t):
        return MlpStudent(self.layer_sizes, self.omegas[t], self.activation)

    def replay_step(self, t, theta, train):
        """Re-executes step t from the stored omega_t and returns omega_{t+1}"""
        if not 0 <= t < self.T:
            raise TrajectoryMismatchException(
                "step %d is outside the %d recorded steps" % (t, self.T)
            )
        batch = train.take(self.batches[t])
        _, omega = _inner_step(
            theta, self.omegas[t], batch, self.states[t], self.etas[t], self.loss, self.activation
        )
        return omega


@dataclass(frozen=True)
class TeacherStepRecord:
    step: int
    dev_smoothed_metric: float
    dev_accuracy: float
    grad_norm: float

    def to_dict(self):
        return {
            "step": self.step,
            "dev_smoothed_metric": self.dev_smoothed_metric,
            "dev_accuracy": self.dev_accuracy,
            "grad_norm": self.grad_norm,
        }


def smoothed_metric(probs, labels, metric=None):
    """Mean over examples of sum_{y*} m(y*, y) p(y*|x), as a scalar Tensor.

    metric is the |Y| x |Y| task metric m(y*, y), predicted class first; the
    default 0-1 metric reduces this to the mean of p(y|x).
    """
    return tn.mean(expected_metric(probs, labels, metric))


def expected_metric(probs, labels, metric=None):
    """Per-example smoothed metric, a (B,) Tensor"""
    probs = tn.as_tensor(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if metric is None:
        return tn.gather(probs, labels)
    metric = np.asarray(metric, dtype=np.float64)
    n_classes = probs.shape[1]
    if metric.shape != (n_classes, n_classes):
        raise ShapeMismatchException("task metric", (n_classes, n_classes), metric.shape)
    return tn.reduce_sum(tn.mul(probs, tn.Tensor(metric.T[labels])), axis=1)


def dev_objective(omega, dev, activation="tanh", metric=None):
    """sum over dev of the smoothed metric; omega maps segment names to Tensors"""
    probs = student_probs(omega, dev.inputs, activation)
    return tn.reduce_sum(expected_metric(probs, dev.labels, metric))


def dev_gradient(student, dev, metric=None):
    """d(sum_dev m~)/d omega_T"""
    return grad(lambda om: dev_objective(om, dev, student.activation, metric), student.omega)


def student_state(student, t, T, train_probe, dev):
    train_acc = accuracy(predict(forward_probs(student, train_probe.inputs)), train_probe.labels)
    dev_preds = predict(forward_probs(student, dev.inputs))
    return featurize_state(
        t,
        T,
        train_acc,
        accuracy(dev_preds, dev.labels),
        per_class_precision(dev_preds, dev.labels, student.n_classes),
    )


def _train_probe(train, cfg):
    if cfg.train_acc_subsample is None or cfg.train_acc_subsample >= len(train):
        return train
    order = np.random.default_rng(cfg.subsample_seed).permutation(len(train))
    return train.take(np.sort(order[: cfg.train_acc_subsample]))


def _dev_probe(dev, cfg):
    if cfg.dev_grad_subsample is None or cfg.dev_grad_subsample >= len(dev):
        return dev
    order = np.random.default_rng(cfg.subsample_seed).permutation(len(dev))
    return dev.take(np.sort(order[: cfg.dev_grad_subsample]))


def _step_objective(loss, activation, batch, state):
    """L_{mu_theta(s)}(f_omega, batch) as f(theta, omega) over Tensor mappings"""

    def objective(theta, omega):
        phi = teacher_forward(theta, state)
        probs = student_probs(omega, batch.inputs, activation)
        return evaluate_loss(loss, probs, batch.labels, phi)

    return objective


def _inner_step(theta, omega, batch, state, eta, loss, activation):
    """One SGD step of the recorded inner run; returns (loss value, new omega)"""
    theta_tensors = theta.to_param_vector().constants()
    objective = _step_objective(loss, activation, batch, state)
    value, g = value_and_grad(lambda om: objective(theta_tensors, om), omega)
    return value, sgd_update(omega, g, eta)


def _check_teacher_family(theta, loss):
    if not loss.teacher_controlled:
        raise LossFamilyException(loss.family, "is not controlled by a teacher")
    if theta.kind != loss.coefficient_kind:
        raise LossFamilyException(
            loss.family,
            "needs %s coefficients, the teacher emits %s" % (loss.coefficient_kind, theta.kind),
        )


def inner_train(theta, train, dev, cfg, loss, states=None):
    """Trains a freshly initialized student with the teacher's loss for cfg.T
    steps of plain SGD, recording the trajectory.

    Keyword arguments:
    theta  -- TeacherParams
    train  -- Dataset the minibatches are drawn from
    dev    -- Dataset behind the dev features of the state
    cfg    -- MetaConfig
    loss   -- LossSpec of a teacher-controlled family
    states -- optional StateVectors to use instead of observing the student

    Returns (student after T steps, TrajectoryRecord)
    """
    _check_teacher_family(theta, loss)
    if states is not None and len(states) != cfg.T:
        raise TrajectoryMismatchException("%d states given for %d steps" % (len(states), cfg.T))
    student = init_student(cfg.layer_sizes, cfg.student_seed, cfg.activation)
    schedule = make_schedule(len(train), cfg.T, cfg.batch_size, cfg.batch_seed)
    probe = _train_probe(train, cfg) if states is None else None
    logger.debug(
        "inner run: T=%d, batch_size=%d, %d train examples", cfg.T, cfg.batch_size, len(train)
    )

    omegas = [student.omega]
    recorded_states = []
    etas = []
    for t in range(cfg.T):
        omega = omegas[-1]
        try:
            if states is None:
                state = student_state(
                    MlpStudent(cfg.layer_sizes, omega, cfg.activation), t, cfg.T, probe, dev
                )
            else:
                state = states[t]
            eta = cfg.eta_at(t)
            value, omega = _inner_step(
                theta, omega, train.take(schedule.batches[t]), state, eta, loss, cfg.activation
            )
            if not np.isfinite(value):
                raise NumericalOverflowException(loss.family)
        except NumericalOverflowException as e:
            raise InnerTrainingException(t, e)
        omegas.append(omega)
        recorded_states.append(state)
        etas.append(eta)

    trajectory = TrajectoryRecord(
        tuple(omegas),
        tuple(recorded_states),
        schedule.batches,
        tuple(etas),
        cfg.layer_sizes,
        cfg.activation,
        loss,
    )
    return trajectory.student(cfg.T), trajectory


def reverse_sweep(theta, traj, train, dev, metric=None, eta_sign=1.0):
    """Runs the reverse recursion over traj.

    dtheta accumulates -eta_t * (d^2 L / dtheta domega) domega_{t+1} and
    domega_t = domega_{t+1} - eta_t * (d^2 L / domega^2) domega_{t+1}, starting
    from domega_T = dev_gradient.  eta_sign = -1 flips every recorded rate,
    which only serves as a negative control.

    Returns (dtheta, domega_0)
    """
    _check_teacher_family(theta, traj.loss)
    theta_params = theta.to_param_vector()
    traj.omegas[0].check_structure(traj.omegas[-1], "trajectory snapshots")
    for t, batch in enumerate(traj.batches):
        if len(batch) and (np.min(batch) < 0 or np.max(batch) >= len(train)):
            raise TrajectoryMismatchException(
                "step %d refers to examples outside the %d training examples" % (t, len(train))
            )

    d_theta = theta_params.zeros_like()
    d_omega = dev_gradient(traj.student(traj.T), dev, metric)
    for t in reversed(range(traj.T)):
        eta = eta_sign * traj.etas[t]
        if eta == 0.0:
            continue
        objective = _step_objective(
            traj.loss, traj.activation, train.take(traj.batches[t]), traj.states[t]
        )
        cross, hessian = joint_hvp(objective, theta_params, traj.omegas[t], d_omega)
        d_theta = d_theta - cross * eta
        d_omega = d_omega - hessian * eta
    logger.debug("reverse sweep over %d steps: |dtheta|=%.6e", traj.T, d_theta.norm())
    return d_theta, d_omega


def rmd_hypergradient(theta, traj, train, dev, metric=None, eta_sign=1.0):
    """d(sum_dev m~(f_{omega_T}))/d theta by reverse-mode differentiation
    through the recorded SGD trajectory, as a ParamVector with segments W, V"""
    return reverse_sweep(theta, traj, train, dev, metric, eta_sign)[0]


def dev_metric_value(student, dev, metric=None):
    """sum over dev of the smoothed metric, as a float"""
    return dev_objective(student.omega.constants(), dev, student.activation, metric).item()


def fd_oracle(
    theta, cfg, train, dev, loss, epsilon=1e-3, metric=None, freeze_states=True, workers=1
):
    """Central differences of sum_dev m~ over every coordinate of theta,
    rerunning inner_train from the same seeds for each perturbation.

    With freeze_states the state features are taken from the unperturbed run,
    so the oracle differentiates the same function the reverse sweep does.
    Coordinates may run on several worker threads; the result keeps
    coordinate order.
    """
    theta_params = theta.to_param_vector()
    if theta_params.total_len > FD_ORACLE_LIMIT:
        raise OracleDimensionException(theta_params.total_len, FD_ORACLE_LIMIT)
    states = None
    if freeze_states:
        states = inner_train(theta, train, dev, cfg, loss)[1].states
    center = theta_params.flatten()

    def objective(values):
        perturbed = TeacherParams.from_param_vector(theta_params.unflatten(values))
        student, _ = inner_train(perturbed, train, dev, cfg, loss, states=states)
        return dev_metric_value(student, dev, metric)

    def coordinate(i):
        plus = center.copy()
        minus = center.copy()
        plus[i] += epsilon
        minus[i] -= epsilon
        return (objective(plus) - objective(minus)) / (2.0 * epsilon)

    coordinates = range(center.size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            diffs = list(pool.map(coordinate, coordinates))
    else:
        diffs = [coordinate(i) for i in coordinates]
    logger.debug("finite-difference oracle evaluated %d coordinates", center.size)
    return theta_params.unflatten(np.array(diffs, dtype=np.float64))


def train_teacher(cfg, train, dev, loss, theta=None, on_step=None, metric=None):
    """Optimizes theta for cfg.teacher_steps steps: train a fresh student,
    take the hypergradient, and ascend with Adam (descent on -dtheta).

    Keyword arguments:
    theta   -- starting TeacherParams (default init_teacher with cfg seeds)
    on_step -- callable(record, theta) invoked after every step

    Returns (TeacherParams, list of TeacherStepRecord)
    """
    if not loss.teacher_controlled:
        raise LossFamilyException(loss.family, "is not controlled by a teacher")
    if theta is None:
        theta = init_teacher(
            cfg.n_classes,
            state_length(cfg.n_classes),
            cfg.n_keys,
            loss.coefficient_kind,
            cfg.teacher_seed,
        )
    params = theta.to_param_vector()
    adam = AdamState.create(params, cfg.adam_alpha, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    grad_dev = _dev_probe(dev, cfg)
    history = []
    for k in range(cfg.teacher_steps):
        step_cfg = cfg
        if cfg.reseed_students:
            step_cfg = replace(
                cfg, student_seed=cfg.student_seed + k, batch_seed=cfg.batch_seed + k
            )
        try:
            student, traj = inner_train(theta, train, dev, step_cfg, loss)
            d_theta = rmd_hypergradient(theta, traj, train, grad_dev, metric)
        except DlfException as e:
            raise TeacherStepException(k, e)
        dev_probs = forward_probs(student, dev.inputs)
        record = TeacherStepRecord(
            k,
            smoothed_metric(dev_probs, dev.labels, metric).item() if len(dev) else 0.0,
            accuracy(predict(dev_probs), dev.labels),
            d_theta.norm(),
        )
        params, adam = adam_step(params, -d_theta, adam)
        theta = TeacherParams.from_param_vector(params)
        history.append(record)
        logger.debug("teacher step %d: %s", k, record)
        if on_step is not None:
            on_step(record, theta)
    return theta, history


def train_student(cfg, train, dev, loss, theta=None, momentum=None):
    """Trains a fresh student with a fixed loss or a fixed teacher.  Nothing is
    recorded or differentiated, so momentum SGD (v <- momentum * v + g) is
    allowed here.

    Returns (MlpStudent, list of per-step loss values)
    """
    momentum = cfg.momentum if momentum is None else momentum
    if loss.teacher_controlled:
        if theta is None:
            raise LossFamilyException(loss.family, "needs a trained teacher")
        _check_teacher_family(theta, loss)
    student = init_student(cfg.layer_sizes, cfg.student_seed, cfg.activation)
    schedule = make_schedule(len(train), cfg.T, cfg.batch_size, cfg.batch_seed)
    probe = _train_probe(train, cfg)
    theta_tensors = theta.to_param_vector().constants() if loss.teacher_controlled else None

    omega = student.omega
    velocity = omega.zeros_like()
    losses = []
    for t in range(cfg.T):
        batch = train.take(schedule.batches[t])
        try:
            phi = None
            if theta_tensors is not None:
                current = MlpStudent(cfg.layer_sizes, omega, cfg.activation)
                phi = teacher_forward(theta_tensors, student_state(current, t, cfg.T, probe, dev))

            def objective(om):
                probs = student_probs(om, batch.inputs, cfg.activation)
                return evaluate_loss(loss, probs, batch.labels, phi)

            value, g = value_and_grad(objective, omega)
            if not np.isfinite(value):
                raise NumericalOverflowException(loss.family)
        except NumericalOverflowException as e:
            raise InnerTrainingException(t, e)
        velocity = velocity * momentum + g
        omega = sgd_update(omega, velocity, cfg.eta_at(t))
        losses.append(value)
    return MlpStudent(cfg.layer_sizes, omega, cfg.activation), losses


def compare_gradients(analytic, reference, coord_floor=1e-8):
    """Agreement of two gradients with the same structure.

    Returns (max_rel_error, cosine).  The relative error of a coordinate is
    |a - b| / max(|a|, |b|) and only coordinates with max(|a|, |b|) above
    coord_floor count.  Two all-zero gradients agree perfectly.
    """
    analytic.check_structure(reference, "gradient comparison")
    a = analytic.flatten()
    b = reference.flatten()
    scale = np.maximum(np.abs(a), np.abs(b))
    counted = scale > coord_floor
    max_rel_error = float(np.max(np.abs(a - b)[counted] / scale[counted])) if counted.any() else 0.0
    norms = np.linalg.norm(a) * np.linalg.norm(b)
    if norms == 0.0:
        cosine = 1.0 if np.linalg.norm(a) == np.linalg.norm(b) else 0.0
    else:
        cosine = float(np.dot(a, b) / norms)
    return max_rel_error, cosine
