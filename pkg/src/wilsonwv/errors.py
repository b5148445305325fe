"""Exception hierarchy shared by all modules."""


class WilsonError(Exception):
    """Base class for errors raised by :mod:`wilsonwv`."""


class EvaluationError(WilsonError, ArithmeticError):
    """A function returned a non-finite value or could not be evaluated."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class PoleError(WilsonError, ZeroDivisionError):
    """Gamma evaluated at a non-positive integer."""


class DegenerateNodeError(WilsonError, ZeroDivisionError):
    """A divided difference hit colliding lattice nodes or a vanishing Pochhammer factor."""


class TruncationError(WilsonError):
    """A coefficient sequence was too short to certify the requested quantity."""

    def __init__(self, message, last_term=None):
        super().__init__(message)
        self.last_term = last_term


class PreconditionError(WilsonError, ValueError):
    """Arguments violate a documented precondition."""


class GrowthGateWarning(UserWarning):
    """The input function appears to violate the Wilson series growth condition."""


class SpecParseError(PreconditionError):
    """An input file could not be parsed; carries the line and column when known."""

    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
