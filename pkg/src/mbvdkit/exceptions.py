"""Exception hierarchy shared by the toolkit."""


class MbvdError(Exception):
    """Base class for all toolkit errors."""


class InputError(MbvdError, ValueError):
    """An argument is malformed, non-finite or outside its domain."""


class SingularNetworkError(MbvdError, ArithmeticError):
    """A network conversion or circuit solve hit a singular point."""


class BoundaryExtremumError(MbvdError):
    """A resonance extremum sits on the edge of the frequency grid."""


class MetricsError(MbvdError):
    """Filter metrics could not be extracted from a sweep."""


class InitializationError(MbvdError):
    """No usable starting point could be derived from measured data."""


class SynthesisError(MbvdError):
    """Static capacitance synthesis failed to produce a passband."""


class ParseError(MbvdError, ValueError):
    """A file could not be parsed.

    ``line`` is the 1-based line number (or ``None``), ``field`` names the
    offending JSON key or CSV column when relevant.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
