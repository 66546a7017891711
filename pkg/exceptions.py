class LabError(Exception):
    """
    Base class for every error raised by the lab.

    Attributes:
        message (str): The error message.
    """

    def __init__(self, message):
        self.message = message
        super().__init__(self.message)


class InvalidInputError(LabError):
    """Non-finite entries, non-conformable dimensions or a bad step size."""


class DomainError(LabError):
    """Input outside the mathematical domain of an operation (not symmetric, not PD, ...)."""


class DegenerateInputError(LabError):
    """The operation is undefined at this point, e.g. F = 0 or rank 0."""


class UnstablePointError(LabError):
    """
    Numeric rank changed under a finite-difference perturbation.

    Attributes:
        message (str): The error message.
        entry (tuple): The (row, col) entry whose perturbation changed the rank.
    """

    def __init__(self, message, entry=None):
        self.entry = entry
        super().__init__(message)


class ConfigError(LabError):
    """
    Experiment configuration could not be parsed.

    Attributes:
        message (str): The error message, prefixed with line/field diagnostics.
        detail (str): The message without the prefix.
        line (int | None): 1-based line number in the config text, if any.
        field (str | None): The offending field name, if known.
    """

    def __init__(self, message, line=None, field=None):
        self.detail = message
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


class ReportWriteError(LabError):
    """The report could not be written to its output path."""
