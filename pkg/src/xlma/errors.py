"""Exception types shared across the toolkit."""


class ConfigurationError(ValueError):
    """Invalid scenario, layout, or problem configuration."""


class DomainError(ValueError):
    """Operation called outside its mathematical domain."""
