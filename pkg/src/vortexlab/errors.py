"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class CflViolation(RuntimeError):
    """Advective CFL bound failed during a spectral solve."""
