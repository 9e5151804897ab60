# Software License Agreement (BSD License)
#
# Copyright (c) 2026, dlf_suite contributors
# All rights reserved. See LICENSE for the full terms.


class DlfException(Exception):
    pass


class InvalidArgumentException(DlfException):
    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        DlfException.__init__(self, message)


class MissingArgumentException(DlfException):
    def __init__(self, field):
        self.field = field
        DlfException.__init__(self, "Expected a %s field but none was found." % field)


class UnknownFieldException(InvalidArgumentException):
    def __init__(self, field):
        InvalidArgumentException.__init__(self, "unknown key", field)


class NumericalOverflowException(DlfException):
    def __init__(self, op):
        self.op = op
        DlfException.__init__(self, "Non-finite value produced by operation '%s'" % op)


class ShapeMismatchException(DlfException):
    def __init__(self, context, expected, found):
        DlfException.__init__(
            self, f"{context}: expected shape {tuple(expected)} but found {tuple(found)}"
        )


class DuplicateSegmentException(DlfException):
    def __init__(self, name):
        DlfException.__init__(self, "Segment name '%s' is used more than once" % name)


class InvalidLabelException(DlfException):
    def __init__(self, label, n_classes):
        DlfException.__init__(
            self, "Label %d is outside the class range [0, %d)" % (label, n_classes)
        )


class LossFamilyException(DlfException):
    def __init__(self, family, reason):
        DlfException.__init__(self, f"Loss family '{family}' {reason}")


class InvalidStateException(DlfException):
    pass


class DatasetException(DlfException):
    pass


class TrajectoryMismatchException(DlfException):
    pass


class OracleDimensionException(DlfException):
    def __init__(self, dim, limit):
        DlfException.__init__(
            self,
            "Finite-difference oracle needs %d coordinates, more than the limit of %d"
            % (dim, limit),
        )


class InnerTrainingException(DlfException):
    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        DlfException.__init__(self, f"Inner training aborted at step {step}: {cause}")


class TeacherStepException(DlfException):
    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        DlfException.__init__(self, f"Teacher optimization step {step} failed: {cause}")


class GradientCheckFailedException(DlfException):
    def __init__(self, max_rel_error, cosine):
        self.max_rel_error = max_rel_error
        self.cosine = cosine
        DlfException.__init__(
            self,
            "Hypergradient disagrees with the finite-difference oracle "
            "(max relative error %.3e, cosine similarity %.6f)" % (max_rel_error, cosine),
        )
