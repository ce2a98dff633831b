"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class DrybeanError(Exception):
    exit_code = 1


class InputError(DrybeanError):
    """Bad or missing input data, config or arguments."""

    exit_code = 2


class FormatError(DrybeanError):
    """A report or grid file that does not parse."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(DrybeanError):
    """Eigensolver or optimizer failed to converge."""

    exit_code = 4
