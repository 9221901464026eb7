"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter outside its documented range."""


class ConsistencyError(RuntimeError):
    """Internal numerical invariant violated (norm drift, bad probability)."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. an all-zero spectrum)."""
