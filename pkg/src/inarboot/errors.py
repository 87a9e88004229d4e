"""Exception types shared across the package."""


class InarBootError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(InarBootError, ValueError):
    """A parameter is outside its admissible domain."""


class DomainError(InarBootError, ValueError):
    """Input data violates a structural requirement (e.g. negative mass)."""


class InputError(InarBootError, ValueError):
    """Malformed user input (files, configs, empty series)."""


class DegenerateSeriesError(InarBootError, ValueError):
    """The series carries no information for the requested operation."""


class ConditioningError(InarBootError, ValueError):
    """Conditioning on an event of probability zero."""


class UndefinedDispersionError(InarBootError, ValueError):
    """Dispersion index requested for a distribution with zero mean."""


class BootstrapError(InarBootError, RuntimeError):
    """Too many bootstrap draws failed to refit."""


class ConfigError(InarBootError, ValueError):
    """Invalid study/CLI configuration. Carries a JSON pointer to the field."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")
