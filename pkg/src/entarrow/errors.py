"""Exception hierarchy shared by every module of the package."""


class EntArrowError(Exception):
    """Base class for all package errors."""


class UsageError(EntArrowError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class PositivityError(EntArrowError, ValueError):
    """A density matrix has an eigenvalue below the positivity tolerance."""


class NoMacrostateError(EntArrowError):
    """No macrostate projector captures the state above the membership threshold."""


class IntegrationError(EntArrowError, RuntimeError):
    """A time integration drifted outside its conservation tolerance."""


class FitError(EntArrowError, RuntimeError):
    """A timescale could not be extracted from a trajectory."""


class ConfigError(EntArrowError, ValueError):
    """An experiment configuration failed schema validation.

    Attributes
    ----------
    path : str
        Dotted location of the offending field (empty for the document root).
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class IoError(EntArrowError, OSError):
    """An output file could not be written."""
