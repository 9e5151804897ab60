# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import sys

from dlf_library.capabilities.dump_coefficients import DumpCoefficients
from dlf_library.capabilities.gradcheck import Gradcheck
from dlf_library.capabilities.train_student import TrainStudent
from dlf_library.capabilities.train_teacher import TrainTeacher
from dlf_library.protocol import METRICS_FILE, Protocol


class DlfProtocol(Protocol):
    """Adds the handlers for the dlf commands and emits every record both to
    the run's metrics.jsonl and to a stream"""

    dlf_capabilities = [TrainTeacher, TrainStudent, Gradcheck, DumpCoefficients]

    def __init__(self, run_id="run", out_dir=None, logger=None, stream=None):
        Protocol.__init__(self, run_id, out_dir, logger)
        self.stream = sys.stdout if stream is None else stream
        for capability_class in self.dlf_capabilities:
            self.add_capability(capability_class)

    def outgoing(self, message):
        if self.out_dir is not None:
            with open(self.output_path(METRICS_FILE), "a", encoding="utf-8") as f:
                f.write(message)
                f.write("\n")
        self.stream.write(message + "\n")
        self.stream.flush()
