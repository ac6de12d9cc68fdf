"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class CheckFailure(RuntimeError):
    """A verification run finished but did not meet its thresholds (exit 1)."""
