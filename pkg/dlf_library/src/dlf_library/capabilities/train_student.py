# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dlf_library.capability import Capability
from dlf_library.internal.exceptions import InvalidArgumentException, MissingArgumentException
from dlf_library.meta import train_student
from dlf_library.student import accuracy, forward_probs, predict


def error_rate(student, ds):
    """Test error in percent, rounded to two decimals"""
    preds = predict(forward_probs(student, ds.inputs))
    return round(100.0 * (1.0 - accuracy(preds, ds.labels)), 2)


class TrainStudent(Capability):

    train_student_msg_fields = [
        (True, "config", str),
        (False, "checkpoint", (str, type(None))),
    ]

    def __init__(self, protocol):
        # Call superclass constructor
        Capability.__init__(self, protocol)

        # Register the operations that this capability provides
        protocol.register_operation("train-student", self.train_student)

    def train_student(self, message):
        self.basic_type_check(message, self.train_student_msg_fields)
        config = self.load_config(message)
        loss = config.loss_spec()
        if config.dataset["sizes"][2] < 1:
            raise InvalidArgumentException("the test set cannot be empty", "dataset.sizes")

        theta = None
        if loss.teacher_controlled:
            path = message.get("checkpoint") or config.teacher["checkpoint"]
            if path is None:
                raise MissingArgumentException("teacher.checkpoint")
            theta = self.load_checkpoint(path, config, loss)
        self.protocol.open_run(config)

        train, dev, test = config.load_datasets()
        cfg = config.meta_config(train.dim)
        self.protocol.log(
            "info",
            "training a student with the %s loss for %d steps (momentum %g)"
            % (loss.family, cfg.T, cfg.momentum),
        )
        student, losses = train_student(cfg, train, dev, loss, theta)
        if losses:
            self.protocol.log("debug", "final minibatch loss %.6f" % losses[-1], cfg.T - 1)

        test_error = error_rate(student, test)
        self.protocol.log("info", "test error %.2f%%" % test_error)
        self.protocol.send({"test_error": test_error})
