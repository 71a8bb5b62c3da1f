"""Exception types shared across the toolkit."""


class SquadkitError(Exception):
    """Base class for all squadkit errors."""


class InputError(SquadkitError, ValueError):
    """Invalid arguments or malformed input data (CLI exit code 3)."""


class ConfigError(SquadkitError):
    """Unusable configuration, e.g. a missing model file (CLI exit code 3)."""


class BackendError(SquadkitError):
    """A data-source backend failed after retries (CLI exit code 4)."""
