"""Exception and warning types shared across the package."""


class SpincoolError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SpincoolError, ValueError):
    pass


class InvalidDimensionError(InvalidParameterError):
    pass


class CapacityError(SpincoolError):
    """A requested problem exceeds a hard size cap."""


class ExtinctionError(SpincoolError):
    """The post-selected branch has vanishing probability."""


class ImpossibleOutcomeError(SpincoolError):
    pass


class ConfigError(SpincoolError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class TruncationWarning(UserWarning):
    """Population near the top of the truncated Fock space is not negligible."""


class RegimeWarning(UserWarning):
    """Pulse parameters fall outside the near-resonant small-detuning regime."""
