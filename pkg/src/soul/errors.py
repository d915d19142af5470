"""Exception types raised across the package."""


class SoulError(Exception):
    """Base class for all package errors."""


class DegenerateVector(SoulError, ValueError):
    """A score vector is constant, so its rank correlation is undefined."""


class SubsampleTooSmall(SoulError, ValueError):
    pass


class NonFiniteFeature(SoulError, ValueError):
    pass


class DatasetTooSmall(SoulError, ValueError):
    pass


class EnsembleTooSmall(SoulError, ValueError):
    pass


class PoolTooSmall(SoulError, ValueError):
    pass


class EmptySelection(SoulError, ValueError):
    pass


class LengthMismatch(SoulError, ValueError):
    pass


class NoPositives(SoulError, ValueError):
    pass


class ParseError(SoulError, ValueError):
    """A dataset cell could not be parsed.

    Attributes
    ----------
    row : int
        1-based line number in the source file.
    column : int or str
        Column index or header name of the offending cell.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class MissingLabelColumn(SoulError, ValueError):
    pass


class NonBinaryLabel(SoulError, ValueError):
    pass


class VersionMismatch(SoulError, ValueError):
    pass


class ChecksumMismatch(SoulError, ValueError):
    pass
