"""Exception hierarchy shared across the package."""


class PeriocularError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PeriocularError):
    """Invalid configuration file or parameters."""


class DataError(PeriocularError):
    """Dataset layout / file content problems."""


class DegenerateGeometryError(PeriocularError):
    """Eye geometry is unusable (coincident centers, implausible scale)."""


class PartitionError(PeriocularError):
    """Block size does not tile the image."""


class BlockTooSmallError(PeriocularError):
    """Image block below the minimum side required by a descriptor."""


class DegenerateTrainingError(PeriocularError):
    """Training set lacks the class diversity the model needs."""


class ShapeError(PeriocularError):
    """Dimensionality mismatch between data and model/descriptor."""
