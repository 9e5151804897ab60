# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import copy
import os
from dataclasses import dataclass
from numbers import Real

from dlf_library import data
from dlf_library.internal import idx
from dlf_library.internal.exceptions import (
    InvalidArgumentException,
    MissingArgumentException,
    UnknownFieldException,
)
from dlf_library.losses import DEFAULT_SMOOTH_K, LOSS_FAMILIES, SMOOTH01, LossSpec
from dlf_library.meta import MetaConfig
from dlf_library.util import json

""" The JSON run configuration.

A run configuration is one document with the blocks below.  Every block is
type checked and range checked before anything is computed, unknown keys are
rejected, and the resolved copy (every default filled in) is what a run
writes beside its outputs.
"""

number = (int, float)
optional_int = (int, type(None))

# (mandatory, fieldname, fieldtypes) per block, as consumed by basic_type_check
FIELDS = {
    "dataset": [
        (True, "type", str),
        (False, "images_path", str),
        (False, "labels_path", str),
        (False, "n", int),
        (False, "n_classes", int),
        (False, "dim", int),
        (False, "separation", number),
        (False, "proportions", (list, type(None))),
        (True, "sizes", list),
        (False, "seed", int),
    ],
    "student": [
        (False, "hidden_sizes", list),
        (False, "activation", str),
        (False, "init_seed", int),
    ],
    "inner": [
        (False, "T", int),
        (False, "batch_size", int),
        (False, "eta", (int, float, list)),
        (False, "batch_seed", int),
        (False, "momentum", number),
        (False, "train_acc_subsample", optional_int),
        (False, "subsample_seed", int),
        (False, "dev_grad_subsample", optional_int),
    ],
    "teacher": [
        (False, "n_keys", int),
        (False, "steps", int),
        (False, "adam_alpha", number),
        (False, "adam_beta1", number),
        (False, "adam_beta2", number),
        (False, "adam_eps", number),
        (False, "init_seed", int),
        (False, "checkpoint", (str, type(None))),
        (False, "reseed_students", bool),
    ],
    "loss": [
        (True, "family", str),
        (False, "smooth_k", (int, float, type(None))),
    ],
    "logging": [
        (False, "out_dir", str),
        (False, "dump_phi_every", int),
        (False, "run_id", str),
    ],
    "gradcheck": [
        (False, "epsilon", number),
        (False, "rel_tolerance", number),
        (False, "min_cosine", number),
        (False, "coord_floor", number),
        (False, "workers", int),
        (False, "reverse_eta_sign", int),
    ],
}

DEFAULTS = {
    "dataset": {
        "images_path": None,
        "labels_path": None,
        "n": 1000,
        "n_classes": None,
        "dim": 2,
        "separation": 2.0,
        "proportions": None,
        "seed": 0,
    },
    "student": {"hidden_sizes": [64], "activation": "tanh", "init_seed": 0},
    "inner": {
        "T": 100,
        "batch_size": 20,
        "eta": 0.01,
        "batch_seed": 0,
        "momentum": 0.0,
        "train_acc_subsample": 512,
        "subsample_seed": 0,
        "dev_grad_subsample": None,
    },
    "teacher": {
        "n_keys": 10,
        "steps": 20,
        "adam_alpha": 1e-4,
        "adam_beta1": 0.9,
        "adam_beta2": 0.999,
        "adam_eps": 1e-8,
        "init_seed": 0,
        "checkpoint": None,
        "reseed_students": False,
    },
    "loss": {"smooth_k": None},
    "logging": {"out_dir": "runs", "dump_phi_every": 0, "run_id": "run"},
    "gradcheck": {
        "epsilon": 1e-3,
        "rel_tolerance": 1e-3,
        "min_cosine": 0.999,
        "coord_floor": 1e-8,
        "workers": 1,
        "reverse_eta_sign": 1,
    },
}

OPTIONAL_BLOCKS = ("student", "inner", "teacher", "logging", "gradcheck")


def basic_type_check(msg, types_info, prefix=None):
    """Performs basic typechecking on fields in msg.

    Keyword arguments:
    msg        -- a dict, typically one block of a deserialized document
    types_info -- a list of tuples (mandatory, fieldname, fieldtypes)
    prefix     -- dotted path of msg, used in error messages

    Throws:
    MissingArgumentException -- if a field is mandatory but not present
    InvalidArgumentException -- if a field is present but not of the type
    specified by fieldtypes

    """
    for mandatory, fieldname, fieldtypes in types_info:
        path = fieldname if prefix is None else f"{prefix}.{fieldname}"
        if mandatory and fieldname not in msg:
            raise MissingArgumentException(path)
        elif fieldname in msg:
            if not isinstance(fieldtypes, tuple):
                fieldtypes = (fieldtypes,)
            value = msg[fieldname]
            # bool is an int subclass but never a valid count or rate
            valid = any(isinstance(value, typ) for typ in fieldtypes) and not (
                isinstance(value, bool) and bool not in fieldtypes
            )
            if not valid:
                names = ", ".join(typ.__name__ for typ in fieldtypes)
                raise InvalidArgumentException(
                    f"expected one of ({names}), got {value!r}", path
                )


def _resolve_block(doc, block):
    raw = doc.get(block, {} if block in OPTIONAL_BLOCKS else None)
    if raw is None:
        raise MissingArgumentException(block)
    if not isinstance(raw, dict):
        raise InvalidArgumentException("expected an object", block)
    known = {name for _, name, _ in FIELDS[block]}
    for key in raw:
        if key not in known:
            raise UnknownFieldException(f"{block}.{key}")
    basic_type_check(raw, FIELDS[block], block)
    resolved = copy.deepcopy(DEFAULTS[block])
    resolved.update(copy.deepcopy(raw))
    return resolved


def _require(condition, message, path):
    if not condition:
        raise InvalidArgumentException(message, path)


def _is_number(value):
    return isinstance(value, Real) and not isinstance(value, bool)


def _is_count(value, lower=0):
    return isinstance(value, int) and not isinstance(value, bool) and value >= lower


def _idx_counts(ds):
    counts = []
    for key, magic in (
        ("images_path", idx.IDX_IMAGES_MAGIC),
        ("labels_path", idx.IDX_LABELS_MAGIC),
    ):
        try:
            counts.append(idx.read_idx_count(ds[key], magic))
        except (idx.IdxFormatException, OSError) as e:
            raise InvalidArgumentException(str(e), f"dataset.{key}")
    return tuple(counts)


def _check_dataset(ds):
    _require(ds["type"] in ("mnist", "blobs"), "must be 'mnist' or 'blobs'", "dataset.type")
    sizes = ds["sizes"]
    _require(
        len(sizes) == 3 and all(_is_count(s) for s in sizes),
        "must be three non-negative integers [train, dev, test]",
        "dataset.sizes",
    )
    _require(sizes[0] >= 1, "the training set cannot be empty", "dataset.sizes")
    if ds["type"] == "mnist":
        if ds["n_classes"] is None:
            ds["n_classes"] = 10
        for key in ("images_path", "labels_path"):
            path = ds[key]
            if path is None:
                raise MissingArgumentException(f"dataset.{key}")
            _require(os.path.isfile(path), f"no such file '{path}'", f"dataset.{key}")
        counts = _idx_counts(ds)
        _require(
            counts[0] == counts[1],
            "%d images but %d labels" % counts,
            "dataset.labels_path",
        )
        _require(
            sum(sizes) <= counts[0],
            "sizes exceed the %d examples in the IDX files" % counts[0],
            "dataset.sizes",
        )
    else:
        if ds["n_classes"] is None:
            ds["n_classes"] = 2
        _require(ds["n"] >= 1, "must be >= 1", "dataset.n")
        _require(ds["dim"] >= 1, "must be >= 1", "dataset.dim")
        _require(ds["separation"] >= 0, "must be >= 0", "dataset.separation")
        _require(
            sum(sizes) <= ds["n"],
            "sizes exceed the %d generated examples" % ds["n"],
            "dataset.sizes",
        )
        _require(ds["n"] >= ds["n_classes"], "must be >= n_classes", "dataset.n")
        if ds["proportions"] is not None:
            props = ds["proportions"]
            _require(
                len(props) == ds["n_classes"] and all(_is_number(p) and p >= 0 for p in props),
                "must be %d non-negative numbers" % ds["n_classes"],
                "dataset.proportions",
            )
            _require(abs(sum(props) - 1.0) <= 1e-9, "must sum to 1", "dataset.proportions")
    _require(ds["n_classes"] >= 2, "must be >= 2", "dataset.n_classes")


def _check_eta(eta):
    if _is_number(eta):
        _require(eta >= 0, "must be >= 0", "inner.eta")
        return
    _require(len(eta) > 0, "a schedule needs at least one [start_step, eta] pair", "inner.eta")
    starts = []
    for pair in eta:
        _require(
            isinstance(pair, list)
            and len(pair) == 2
            and _is_count(pair[0])
            and _is_number(pair[1])
            and pair[1] >= 0,
            "schedule entries must be [start_step, eta] with eta >= 0",
            "inner.eta",
        )
        starts.append(pair[0])
    _require(starts[0] == 0, "a schedule must start at step 0", "inner.eta")
    _require(
        all(b > a for a, b in zip(starts, starts[1:])), "schedule steps must increase", "inner.eta"
    )


def _check_ranges(cfg):
    _check_dataset(cfg["dataset"])

    student = cfg["student"]
    _require(
        all(_is_count(h, 1) for h in student["hidden_sizes"]),
        "must be a list of positive integers",
        "student.hidden_sizes",
    )
    _require(
        student["activation"] in ("tanh", "sigmoid"),
        "must be 'tanh' or 'sigmoid'",
        "student.activation",
    )

    inner = cfg["inner"]
    _require(inner["T"] >= 0, "must be >= 0", "inner.T")
    _require(inner["batch_size"] >= 1, "must be >= 1", "inner.batch_size")
    _check_eta(inner["eta"])
    _require(0 <= inner["momentum"] < 1, "must lie in [0, 1)", "inner.momentum")
    for key in ("train_acc_subsample", "dev_grad_subsample"):
        _require(inner[key] is None or inner[key] >= 1, "must be >= 1 or null", f"inner.{key}")

    teacher = cfg["teacher"]
    _require(teacher["n_keys"] >= 1, "must be >= 1", "teacher.n_keys")
    _require(teacher["steps"] >= 0, "must be >= 0", "teacher.steps")
    _require(teacher["adam_alpha"] > 0, "must be > 0", "teacher.adam_alpha")
    for key in ("adam_beta1", "adam_beta2"):
        _require(0 <= teacher[key] < 1, "must lie in [0, 1)", f"teacher.{key}")
    _require(teacher["adam_eps"] > 0, "must be > 0", "teacher.adam_eps")

    loss = cfg["loss"]
    _require(loss["family"] in LOSS_FAMILIES, "must be one of %s" % (LOSS_FAMILIES,), "loss.family")
    if loss["family"] == SMOOTH01:
        if loss["smooth_k"] is None:
            loss["smooth_k"] = DEFAULT_SMOOTH_K
        _require(loss["smooth_k"] > 0, "must be > 0", "loss.smooth_k")
    else:
        _require(loss["smooth_k"] is None, "only applies to the smooth01 family", "loss.smooth_k")

    logging_block = cfg["logging"]
    _require(logging_block["dump_phi_every"] >= 0, "must be >= 0", "logging.dump_phi_every")
    _require(logging_block["run_id"] != "", "cannot be empty", "logging.run_id")

    gradcheck = cfg["gradcheck"]
    for key in ("epsilon", "rel_tolerance", "coord_floor"):
        _require(gradcheck[key] > 0, "must be > 0", f"gradcheck.{key}")
    _require(-1 <= gradcheck["min_cosine"] <= 1, "must lie in [-1, 1]", "gradcheck.min_cosine")
    _require(gradcheck["workers"] >= 1, "must be >= 1", "gradcheck.workers")
    _require(
        gradcheck["reverse_eta_sign"] in (1, -1), "must be 1 or -1", "gradcheck.reverse_eta_sign"
    )


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration; each block is a dict with every key
    present"""

    dataset: dict
    student: dict
    inner: dict
    teacher: dict
    loss: dict
    logging: dict
    gradcheck: dict

    @classmethod
    def from_dict(cls, doc, out_dir=None):
        """Validates doc and fills in defaults.

        Keyword arguments:
        doc     -- the deserialized JSON document
        out_dir -- optional override of logging.out_dir

        """
        if not isinstance(doc, dict):
            raise InvalidArgumentException("a run configuration must be a JSON object")
        for key in doc:
            if key not in FIELDS:
                raise UnknownFieldException(key)
        resolved = {block: _resolve_block(doc, block) for block in FIELDS}
        _check_ranges(resolved)
        if out_dir is not None:
            resolved["logging"]["out_dir"] = out_dir
        return cls(**resolved)

    def to_dict(self):
        return {block: copy.deepcopy(getattr(self, block)) for block in FIELDS}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @property
    def n_classes(self):
        return self.dataset["n_classes"]

    def layer_sizes(self, input_dim):
        return (input_dim, *self.student["hidden_sizes"], self.n_classes)

    def loss_spec(self):
        return LossSpec(self.loss["family"], self.loss["smooth_k"])

    def meta_config(self, input_dim):
        inner = self.inner
        teacher = self.teacher
        return MetaConfig(
            layer_sizes=self.layer_sizes(input_dim),
            T=inner["T"],
            batch_size=inner["batch_size"],
            eta=inner["eta"],
            teacher_steps=teacher["steps"],
            activation=self.student["activation"],
            student_seed=self.student["init_seed"],
            batch_seed=inner["batch_seed"],
            train_acc_subsample=inner["train_acc_subsample"],
            subsample_seed=inner["subsample_seed"],
            dev_grad_subsample=inner["dev_grad_subsample"],
            n_keys=teacher["n_keys"],
            teacher_seed=teacher["init_seed"],
            adam_alpha=float(teacher["adam_alpha"]),
            adam_beta1=float(teacher["adam_beta1"]),
            adam_beta2=float(teacher["adam_beta2"]),
            adam_eps=float(teacher["adam_eps"]),
            reseed_students=teacher["reseed_students"],
            momentum=float(inner["momentum"]),
        )

    def load_datasets(self):
        """Returns the (train, dev, test) split this configuration describes"""
        ds = self.dataset
        if ds["type"] == "mnist":
            full = data.load_mnist_idx(ds["images_path"], ds["labels_path"], ds["n_classes"])
        else:
            full = data.synth_blobs(
                ds["n"],
                ds["n_classes"],
                ds["dim"],
                ds["separation"],
                ds["proportions"],
                ds["seed"],
            )
        return data.split(full, ds["sizes"], ds["seed"])


def load_run_config(path, out_dir=None):
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.loads(f.read())
    except OSError as e:
        raise InvalidArgumentException(f"cannot read '{path}': {e.strerror}", "config")
    except ValueError as e:
        raise InvalidArgumentException(f"'{path}' is not valid JSON: {e}", "config")
    return RunConfig.from_dict(doc, out_dir)
