class ConfigError(ValueError):
    """Invalid configuration or CLI input (exit code 2)."""


class NumericError(FloatingPointError):
    """Non-finite loss, gradient or intermediate value (exit code 3)."""
