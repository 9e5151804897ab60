# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.

import argparse
import logging
import os
import sys

from dlf_library.dlf_protocol import DlfProtocol

OUT_DIR_ENV = "DLF_OUT_DIR"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dlf", description="Learn a teacher that sets the loss function of a student."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at debug level")
    commands = parser.add_subparsers(dest="op", required=True)

    train_teacher = commands.add_parser("train-teacher", help="optimize a teacher model")
    train_teacher.add_argument("--config", required=True, help="run configuration (JSON)")

    train_student = commands.add_parser(
        "train-student", help="train a student with a fixed loss or a trained teacher"
    )
    train_student.add_argument("--config", required=True, help="run configuration (JSON)")
    train_student.add_argument(
        "--checkpoint", default=None, help="teacher checkpoint, overrides teacher.checkpoint"
    )

    gradcheck = commands.add_parser(
        "gradcheck", help="compare the hypergradient against finite differences"
    )
    gradcheck.add_argument("--config", required=True, help="run configuration (JSON)")

    dump = commands.add_parser(
        "dump-coefficients", help="write the loss coefficients a teacher emits for given states"
    )
    dump.add_argument("--checkpoint", required=True, help="teacher checkpoint")
    dump.add_argument("--states", required=True, help="CSV file, one state vector per row")
    dump.add_argument("--out", required=True, help="output CSV path")
    return parser


def build_message(args):
    """The command message a DlfProtocol understands, from parsed arguments"""
    message = {"op": args.op}
    for key in ("config", "checkpoint", "states", "out"):
        value = getattr(args, key, None)
        if value is not None:
            message[key] = value
    return message


def main(args=None):
    if args is None:
        args = sys.argv[1:]

    parsed = build_parser().parse_args(args)
    logging.basicConfig(
        level=logging.DEBUG if parsed.verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )

    protocol = DlfProtocol(out_dir=os.environ.get(OUT_DIR_ENV) or None)
    try:
        return protocol.incoming(build_message(parsed))
    except KeyboardInterrupt:
        protocol.log("warn", "Exiting due to SIGINT")
        return 130
    finally:
        protocol.finish()


if __name__ == "__main__":
    sys.exit(main())
