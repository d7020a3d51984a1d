"""Exception types. CLI exit codes hang off these classes."""


class GPEchoError(Exception):
    exit_code = 1


class ConfigError(GPEchoError, ValueError):
    """Invalid configuration, including resolution-guard violations."""

    exit_code = 2


class NumericalError(GPEchoError, ArithmeticError):
    exit_code = 3


class NoEchoFound(GPEchoError):
    exit_code = 4


class InsufficientNodes(GPEchoError):
    def __init__(self, found: int, requested: int):
        super().__init__(f"found {found} temporal nodes, {requested} requested")
        self.found = found
        self.requested = requested


class UndefinedFidelity(GPEchoError, ZeroDivisionError):
    pass


class TruncationWarning(UserWarning):
    """Record ends before the signal has decayed."""
