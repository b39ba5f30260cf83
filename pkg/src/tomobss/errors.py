"""Exception types raised by tomobss."""


class TomoBSSError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TomoBSSError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometryError(InvalidInputError):
    """The baseline aperture is zero, so no elevation resolution exists."""


class DegenerateInputError(InvalidInputError):
    """The data carry no usable information (e.g. all-zero columns)."""


class NoSignalError(TomoBSSError):
    """The kernel spectrum has no significant component to extract."""


class NoPeakError(TomoBSSError):
    """A periodogram profile is flat, so the argmax is meaningless."""


class UndefinedRatioError(TomoBSSError, ZeroDivisionError):
    """A relative bias was requested for coincident reference vectors."""
