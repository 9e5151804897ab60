# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from pathlib import Path

import numpy as np

from dlf_library.capability import Capability
from dlf_library.internal.exceptions import InvalidArgumentException, InvalidStateException
from dlf_library.teacher import StateVector, load_teacher, teacher_forward


def write_coefficients_csv(path, phi):
    """Writes Phi with one row per true class; a diagonal Phi is one row"""
    values = phi.values.data
    np.savetxt(path, values.reshape(1, -1) if values.ndim == 1 else values, delimiter=",")


def coefficient_paths(out_csv, count):
    """out_csv itself for a single state, <stem>_<i><suffix> for several"""
    out_csv = Path(out_csv)
    if count == 1:
        return [out_csv]
    return [out_csv.with_name(f"{out_csv.stem}_{i}{out_csv.suffix}") for i in range(count)]


class DumpCoefficients(Capability):

    dump_coefficients_msg_fields = [
        (True, "checkpoint", str),
        (True, "states", str),
        (True, "out", str),
    ]

    def __init__(self, protocol):
        # Call superclass constructor
        Capability.__init__(self, protocol)

        # Register the operations that this capability provides
        protocol.register_operation("dump-coefficients", self.dump_coefficients)

    def dump_coefficients(self, message):
        self.basic_type_check(message, self.dump_coefficients_msg_fields)

        theta = load_teacher(message["checkpoint"])
        try:
            rows = np.loadtxt(message["states"], delimiter=",", ndmin=2)
        except (OSError, ValueError) as e:
            raise InvalidArgumentException(f"cannot read state vectors: {e}", "states")
        if rows.shape[1] != theta.state_len:
            raise InvalidArgumentException(
                "state vectors have %d entries but the teacher expects %d"
                % (rows.shape[1], theta.state_len),
                "states",
            )
        try:
            states = [StateVector(row) for row in rows]
        except InvalidStateException as e:
            raise InvalidArgumentException(str(e), "states")

        paths = coefficient_paths(message["out"], len(states))
        for path, state in zip(paths, states):
            write_coefficients_csv(path, teacher_forward(theta, state))
        self.protocol.log("info", "wrote %d coefficient matrices" % len(paths))
        self.protocol.send({"coefficients": [str(p) for p in paths]})
