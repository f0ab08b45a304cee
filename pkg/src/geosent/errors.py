"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ``FormatError`` and ``ArgumentError``
exit with 2, ``OSError`` with 1.
"""


class GeosentError(Exception):
    """Base class for all package errors."""


class ArgumentError(GeosentError, ValueError):
    """A caller passed arguments that violate an operation's preconditions."""


class FormatError(GeosentError, ValueError):
    """An input file or value could not be parsed.

    ``source`` names the file (or stream) and ``location`` the line, cell or
    column that failed, when known.
    """

    def __init__(self, message, source=None, location=None):
        self.source = source
        self.location = location
        parts = [str(p) for p in (source, location) if p is not None]
        prefix = ":".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class EmptyInputError(ArgumentError):
    """A text produced no tokens."""


class NotComputableError(ArgumentError):
    """A statistic is undefined for the given data (e.g. a constant series).

    Kept distinct from a numeric result so callers never mistake an undefined
    correlation for ``r = 0``.
    """
