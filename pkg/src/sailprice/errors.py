"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class SailpriceError(Exception):
    exit_code = 70


class IoError(SailpriceError):
    exit_code = 1


class DataError(SailpriceError):
    """Empty or degenerate input data."""

    exit_code = 2


class UsageError(SailpriceError):
    exit_code = 64


class NumericalError(SailpriceError):
    exit_code = 70


class FileNotFound(IoError):
    pass


class HeaderMismatch(DataError):
    pass


class EmptyAfterCleaning(DataError):
    pass


class EmptyInput(DataError):
    pass


class TooFewRows(DataError):
    pass


class UnknownRegion(DataError):
    pass


class SingleRegion(DataError):
    pass


class MissingColumn(DataError):
    pass


class ZeroVarianceColumn(DataError):
    pass


class ZeroVariance(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class NonFiniteData(DataError):
    pass


class RankDeficient(NumericalError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class Diverged(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    pass


class NonFiniteLoss(NumericalError):
    pass
