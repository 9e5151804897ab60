# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

from dlf_library.internal import run_config
from dlf_library.internal.exceptions import InvalidArgumentException
from dlf_library.teacher import load_teacher, state_length


class Capability:
    """Handles the operation-specific logic of a dlf command

    May define one or more opcodes to handle, for example 'train-teacher' or
    'gradcheck'

    Protocol.send() is available to emit records of the run.

    """

    def __init__(self, protocol):
        """Abstract class constructor.  All capabilities require a handle to
        the containing protocol.

        Keyword arguments:
        protocol -- the protocol instance for this capability instance

        """
        self.protocol = protocol

    def finish(self):
        """Notify this capability that the command is finished and that it's
        time to free up resources."""
        pass

    def basic_type_check(self, msg, types_info):
        """Performs basic typechecking on fields in msg.

        Keyword arguments:
        msg        -- a message dictionary
        types_info -- a list of tuples (mandatory, fieldname, fieldtype) where
                mandatory - boolean, is the field mandatory
                fieldname - the name of the field in the message
                fieldtypes - the expected python type of the field or list of types

        Throws:
        MissingArgumentException -- if a field is mandatory but not present in
        the message
        InvalidArgumentException -- if a field is present but not of the type
        specified by fieldtype

        """
        run_config.basic_type_check(msg, types_info)

    def load_config(self, message):
        """Reads and validates the configuration named by message["config"]"""
        return run_config.load_run_config(message["config"], self.protocol.out_dir_override)

    def require_teacher_family(self, config):
        spec = config.loss_spec()
        if not spec.teacher_controlled:
            raise InvalidArgumentException(
                f"'{spec.family}' is not a teacher-controlled family", "loss.family"
            )
        return spec

    def load_checkpoint(self, path, config, loss):
        """Loads a teacher checkpoint and checks that it fits the run: the
        coefficient kind of the loss family, the class count and the state
        length.  A mismatch is a configuration error."""
        theta = load_teacher(path)
        if theta.kind != loss.coefficient_kind:
            raise InvalidArgumentException(
                f"the checkpoint holds {theta.kind} coefficients", "loss.family"
            )
        n_classes = config.n_classes
        if theta.n_classes != n_classes or theta.state_len != state_length(n_classes):
            raise InvalidArgumentException(
                "the checkpoint does not match %d classes" % n_classes, "teacher.checkpoint"
            )
        return theta
