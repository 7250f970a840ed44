"""Exception types shared across the toolkit."""


class MisinfoError(Exception):
    """Base class for toolkit errors."""


class DataError(MisinfoError):
    """Malformed or inconsistent input data (bad rows, unknown labels, id clashes)."""


class ConfigError(MisinfoError):
    """Invalid configuration, unusable paths, or bad command-line usage."""
