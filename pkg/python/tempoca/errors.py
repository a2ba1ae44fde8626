"""Exceptions raised by tempoca."""


class TempocaError(Exception):
    """Base class of every error raised by the package."""


class DataError(TempocaError):
    """Input data cannot be used as given."""


class MissingValue(DataError):
    pass


class ShapeError(DataError):
    pass


class TooShort(DataError):
    pass


class ConstantSeries(DataError):
    pass


class DomainError(TempocaError, ValueError):
    """Argument outside the domain of a numerical routine."""


class KTooLarge(TempocaError, ValueError):
    pass


class ShapeMismatch(TempocaError, ValueError):
    pass


class SelfTest(TempocaError, ValueError):
    """PMIME of a series on itself is structurally zero and never tested."""


class RankDeficient(TempocaError):
    pass


class InvalidParams(TempocaError, ValueError):
    pass


class InvalidSpec(TempocaError, ValueError):
    pass


class NodeMismatch(TempocaError, ValueError):
    pass


class ManifestError(TempocaError):
    pass


class InvalidGraph(TempocaError, ValueError):
    pass


class UsageError(TempocaError):
    """Bad command line."""


class ResumeMismatch(InvalidParams):
    """A results directory was written with other settings."""
