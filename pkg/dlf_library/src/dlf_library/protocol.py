# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import logging
import os

from dlf_library.internal.exceptions import (
    DlfException,
    GradientCheckFailedException,
    InvalidArgumentException,
    MissingArgumentException,
)
from dlf_library.util import json

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_GRADCHECK = 3

METRICS_FILE = "metrics.jsonl"
RESOLVED_CONFIG_FILE = "resolved_config.json"


class Protocol:
    """The interface a single command uses to run and report an experiment.

    See dlf_protocol for the default protocol used by the dlf commands

    The lifecycle for a Protocol instance is as follows:
    - Pass the command message to incoming, which returns the exit code
    - Capabilities call open_run once the configuration is known, then send
      records as they are produced
    - Propagate outgoing records by overriding outgoing
    - Call finish to clean up resources when the command is done

    """

    def __init__(self, run_id="run", out_dir=None, logger=None):
        """Keyword arguments:
        run_id  -- the name this run logs under until a configuration names it
        out_dir -- if given, overrides logging.out_dir of every configuration
        logger  -- the logging.Logger to write to (default: the "dlf" logger)

        """
        self.run_id = run_id
        self.out_dir_override = out_dir
        self.out_dir = None
        self.capabilities = []
        self.operations = {}
        self.logger = logger or logging.getLogger("dlf")

    def incoming(self, message):
        """Process a command message

        Keyword arguments:
        message -- a dict with an "op" field naming the operation and the
        arguments of that operation

        Returns the process exit code
        """
        if "op" not in message:
            self.log(
                "error",
                "Received a message without an op.  All messages require 'op' field "
                f"with value one of: {list(self.operations.keys())}",
            )
            return EXIT_CONFIG
        op = message["op"]
        if op not in self.operations:
            self.log(
                "error",
                f"Unknown operation: {op}.  Allowed operations: {list(self.operations.keys())}",
            )
            return EXIT_CONFIG

        try:
            self.operations[op](message)
        except (InvalidArgumentException, MissingArgumentException) as exc:
            self.log("error", f"{op}: invalid configuration: {exc}")
            return EXIT_CONFIG
        except GradientCheckFailedException as exc:
            self.log("error", f"{op}: {exc}")
            return EXIT_GRADCHECK
        except DlfException as exc:
            self.log("error", f"{op}: {type(exc).__name__}: {exc}", getattr(exc, "step", None))
            return EXIT_FAILURE
        except Exception as exc:
            self.logger.exception("[Run %s] %s: unexpected %s", self.run_id, op, type(exc).__name__)
            return EXIT_FAILURE
        return EXIT_OK

    def open_run(self, config):
        """Names the run after config, creates its output directory and writes
        the resolved configuration there.  Truncates any previous metrics."""
        self.run_id = config.logging["run_id"]
        self.out_dir = config.logging["out_dir"]
        os.makedirs(self.out_dir, exist_ok=True)
        with open(self.output_path(RESOLVED_CONFIG_FILE), "w", encoding="utf-8") as f:
            f.write(config.to_json())
            f.write("\n")
        open(self.output_path(METRICS_FILE), "w", encoding="utf-8").close()
        self.log("info", f"writing outputs to {self.out_dir}")

    def output_path(self, name):
        return os.path.join(self.out_dir, name)

    def outgoing(self, message):
        """Pass a serialized record on.  This method should be overridden.

        Keyword arguments:
        message -- the serialized record

        """
        pass

    def send(self, message, cid=None):
        """Called internally in preparation for emitting a record

        This method serializes the message then passes it to the overridden
        outgoing method.

        Keyword arguments:
        message -- a dict of values to be serialized and emitted
        cid     -- (optional) an associated id

        """
        serialized = self.serialize(message, cid)
        if serialized is not None:
            self.outgoing(serialized)

    def finish(self):
        """Indicate that the command is finished and clean up resources."""
        for capability in self.capabilities:
            capability.finish()

    def serialize(self, msg, cid=None):
        """Turns a dictionary of values into one JSON line.

        Keyword arguments:
        msg -- the dictionary of values to serialize
        cid -- (optional) an ID associated with this.  Will be logged on err.

        Returns a JSON string representing the dictionary
        """
        try:
            return json.dumps(msg)
        except Exception as e:
            self.log("error", f"Unable to serialize record '{msg}': {e}", cid)
            return None

    def register_operation(self, opcode, handler):
        """Register a handler for an opcode

        Keyword arguments:
        opcode  -- the opcode to register this handler for
        handler -- a callback function to call for messages with this opcode

        """
        self.operations[opcode] = handler

    def unregister_operation(self, opcode):
        """Unregister a handler for an opcode

        Keyword arguments:
        opcode -- the opcode to unregister the handler for

        """
        if opcode in self.operations:
            del self.operations[opcode]

    def add_capability(self, capability_class):
        """Add a capability to the protocol.

        This method is for convenience; assumes the default capability
        constructor

        Keyword arguments:
        capability_class -- the class of the capability to add

        """
        self.capabilities.append(capability_class(self))

    def log(self, level, message, lid=None):
        """Log a message about this run.

        Keyword arguments:
        level   -- the logger level of this message
        message -- the string message to log
        lid     -- an associated step for this log message

        """
        if lid is not None:
            formatted = f"[Run {self.run_id}] [step: {lid}] {message}"
        else:
            formatted = f"[Run {self.run_id}] {message}"

        if level == "error" or level == "err":
            self.logger.error(formatted)
        elif level == "warning" or level == "warn":
            self.logger.warning(formatted)
        elif level == "info" or level == "information":
            self.logger.info(formatted)
        else:
            self.logger.debug(formatted)
