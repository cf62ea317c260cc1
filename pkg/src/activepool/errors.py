"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """A file or serialized payload does not conform to its format."""


class PoolStateError(ValueError):
    """A pool operation violates the labeled/unlabeled partition contract."""


class SelectionError(ValueError):
    """A selection strategy was invoked with unsatisfiable arguments."""


class ShortfallError(ValueError):
    """The selection phase cannot reach the configured labeling budget."""
