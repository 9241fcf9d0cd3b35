"""Exception hierarchy shared by the library and the CLI.

The CLI maps InputError to exit code 1 and InvariantViolation to exit code 2.
"""


class InputError(ValueError):
    """A problem with user-supplied data: files, flags, infeasible specs."""


class GraphFormatError(InputError):
    """Malformed graph or vector document; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(RuntimeError):
    """An internal consistency check failed (e.g. a bound certificate broke)."""
