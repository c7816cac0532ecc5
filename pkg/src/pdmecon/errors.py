"""Shared exception types."""


class ValidationError(ValueError):
    """Inputs, configuration, or files violate a documented contract."""


class IngestError(ValidationError):
    """A historian CSV export cannot be loaded."""
