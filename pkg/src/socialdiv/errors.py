"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model parameters or an unsupported combination of them."""


class UnsupportedModelError(ConfigurationError):
    """The requested solver cannot handle this engine (e.g. non-atomic laws)."""


class ResourceError(RuntimeError):
    """A computation would exceed its state or path budget."""
