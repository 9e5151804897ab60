# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dlf_library.capability import Capability
from dlf_library.internal.exceptions import GradientCheckFailedException
from dlf_library.meta import compare_gradients, fd_oracle, inner_train, rmd_hypergradient
from dlf_library.teacher import init_teacher, state_length


class Gradcheck(Capability):
    """Compares the reverse-mode hypergradient of a fresh (or checkpointed)
    teacher against central finite differences of the whole inner run"""

    gradcheck_msg_fields = [(True, "config", str)]

    def __init__(self, protocol):
        # Call superclass constructor
        Capability.__init__(self, protocol)

        # Register the operations that this capability provides
        protocol.register_operation("gradcheck", self.gradcheck)

    def gradcheck(self, message):
        self.basic_type_check(message, self.gradcheck_msg_fields)
        config = self.load_config(message)
        loss = self.require_teacher_family(config)
        theta = None
        if config.teacher["checkpoint"] is not None:
            theta = self.load_checkpoint(config.teacher["checkpoint"], config, loss)
        self.protocol.open_run(config)
        settings = config.gradcheck

        train, dev, _ = config.load_datasets()
        cfg = config.meta_config(train.dim)
        if theta is None:
            theta = init_teacher(
                cfg.n_classes,
                state_length(cfg.n_classes),
                cfg.n_keys,
                loss.coefficient_kind,
                cfg.teacher_seed,
            )

        _, traj = inner_train(theta, train, dev, cfg, loss)
        analytic = rmd_hypergradient(
            theta, traj, train, dev, eta_sign=float(settings["reverse_eta_sign"])
        )
        reference = fd_oracle(
            theta, cfg, train, dev, loss, settings["epsilon"], workers=settings["workers"]
        )
        max_rel_error, cosine = compare_gradients(analytic, reference, settings["coord_floor"])

        self.protocol.log(
            "info", "max relative error %.3e, cosine similarity %.6f" % (max_rel_error, cosine)
        )
        self.protocol.send(
            {
                "max_rel_error": max_rel_error,
                "cosine": cosine,
                "hypergradient_norm": analytic.norm(),
                "oracle_norm": reference.norm(),
            }
        )
        if max_rel_error > settings["rel_tolerance"] or cosine < settings["min_cosine"]:
            raise GradientCheckFailedException(max_rel_error, cosine)
