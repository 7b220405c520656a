"""Exception hierarchy shared by all solver modules."""


class FracGreenError(Exception):
    """Base class for errors raised by :mod:`fracgreen`."""


class PoleError(FracGreenError, ValueError):
    """Gamma (or a derived function) evaluated at a nonpositive integer."""


class ConvergenceError(FracGreenError, RuntimeError):
    """A series or an iteration did not converge within its budget."""


class TruncationError(ConvergenceError):
    """A Neumann series did not reach its tail tolerance.

    The partially summed series is kept on :attr:`partial` so callers can
    still inspect (or deliberately use) it.
    """

    def __init__(self, message, partial=None, last_increment=None):
        super().__init__(message)
        self.partial = partial
        self.last_increment = last_increment


class DomainError(FracGreenError, ValueError):
    """Evaluation requested outside the domain of a series or operator."""


class TermOverflowError(FracGreenError, RuntimeError):
    """A power series exceeded its term-count cap."""


class SpecParseError(FracGreenError, ValueError):
    """A problem-spec file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class SpecValidationError(FracGreenError, ValueError):
    """A parsed problem spec violates one of its invariants."""
