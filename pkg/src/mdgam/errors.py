"""Exception hierarchy shared across the package.

``ValidationError`` subclasses signal bad inputs (wrong shapes, empty
classes, malformed files); the CLI maps them to exit code 2. Everything
else derived from ``MdgamError`` is a runtime failure (exit code 1).
"""


class MdgamError(Exception):
    """Base class for all package errors."""


class ValidationError(MdgamError):
    """Invalid user input or violated operation precondition."""


class TooFewRows(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EmptyModelList(ValidationError):
    pass


class NonPositiveH(ValidationError):
    pass


class MissingClass(ValidationError):
    pass


class KindMismatch(ValidationError):
    pass


class ClassTooSmall(ValidationError):
    pass


class UnknownExample(ValidationError):
    pass


class BadInterval(ValidationError):
    pass


class BadParameters(ValidationError):
    pass


class NoClosedForm(ValidationError):
    pass


class BadK(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class LabelMissing(ValidationError):
    pass


class AllZeroAccuracy(ValidationError):
    pass


class AllResamplesSkipped(MdgamError):
    """Every bootstrap resample had an empty out-of-bag set."""


class NumericalError(MdgamError):
    """Internal numerical diagnostic, e.g. a quadratic form far below zero."""


class ModelFormatError(ValidationError):
    """Malformed or version-incompatible model file."""
