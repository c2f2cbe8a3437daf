"""Exception hierarchy shared by the library and the CLI."""


class ComplexityError(Exception):
    """Base class for all errors raised by econcomplex."""

    exit_code = 2


class DataError(ComplexityError):
    """Input data violates a precondition (bad values, too few entities, ...)."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RejectedRecordsError(DataError):
    """Raised after parsing when records with negative, blank or non-finite values were seen."""

    def __init__(self, message, report=None, lines=()):
        self.report = report
        self.lines = tuple(lines)
        super().__init__(message)


class DegenerateMarginError(DataError):
    """An actor or item has a zero total, so shares are undefined."""

    def __init__(self, message, entity=None):
        self.entity = entity
        super().__init__(message)


class TooDegenerateError(DataError):
    """Fewer than two actors or items survive construction or pruning."""


class DegenerateSpectrumError(DataError):
    """The top eigenvalue is not simple, so the requested quantity is undefined."""

    def __init__(self, message, top_multiplicity=None):
        self.top_multiplicity = top_multiplicity
        super().__init__(message)


class SolverError(ComplexityError):
    """The iterative eigensolver did not converge."""

    exit_code = 3

    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)
