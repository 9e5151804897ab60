# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dlf_library.capabilities.dump_coefficients import write_coefficients_csv
from dlf_library.capability import Capability
from dlf_library.meta import inner_train, train_teacher
from dlf_library.teacher import save_teacher, teacher_forward

CHECKPOINT_FILE = "teacher.ckpt"


class TrainTeacher(Capability):

    train_teacher_msg_fields = [(True, "config", str)]

    def __init__(self, protocol):
        # Call superclass constructor
        Capability.__init__(self, protocol)

        # Register the operations that this capability provides
        protocol.register_operation("train-teacher", self.train_teacher)

    def train_teacher(self, message):
        self.basic_type_check(message, self.train_teacher_msg_fields)
        config = self.load_config(message)
        loss = self.require_teacher_family(config)
        theta = None
        if config.teacher["checkpoint"] is not None:
            theta = self.load_checkpoint(config.teacher["checkpoint"], config, loss)
        self.protocol.open_run(config)

        train, dev, _ = config.load_datasets()
        cfg = config.meta_config(train.dim)
        self.protocol.log(
            "info",
            "training a %s teacher for %d steps on %d train / %d dev examples"
            % (loss.family, cfg.teacher_steps, len(train), len(dev)),
        )

        def on_step(record, _theta):
            self.protocol.log(
                "info",
                "dev m~ %.6f, dev accuracy %.4f, |dtheta| %.3e"
                % (record.dev_smoothed_metric, record.dev_accuracy, record.grad_norm),
                record.step,
            )
            self.protocol.send(record.to_dict())

        theta, _ = train_teacher(cfg, train, dev, loss, theta, on_step=on_step)
        save_teacher(self.protocol.output_path(CHECKPOINT_FILE), theta)

        every = config.logging["dump_phi_every"]
        if every > 0:
            _, traj = inner_train(theta, train, dev, cfg, loss)
            for t in range(0, traj.T, every):
                phi = teacher_forward(theta, traj.states[t])
                write_coefficients_csv(self.protocol.output_path(f"phi_step{t}.csv"), phi)
            self.protocol.log("debug", "dumped the coefficients of the final inner run")
