"""Exception types shared across the package.

Every error derives from :class:`KDError` so callers (and the CLI) can catch
the whole family at once. ``exit_code`` is what the CLI reports.
"""


class KDError(ValueError):
    exit_code = 2


class DimensionMismatch(KDError):
    pass


class InvalidState(KDError):
    pass


class NotUnitary(KDError):
    pass


class NotAChannel(KDError):
    pass


class NotInformationallyComplete(KDError):
    pass


class NonProductBasis(KDError):
    pass


class WrongBasisFamily(KDError):
    pass


class EvenDimension(KDError):
    pass


class NotMUB(KDError):
    pass


class ZeroDistribution(KDError):
    pass


class DenominatorTooSmall(KDError):
    pass


class DimensionCapExceeded(KDError):
    exit_code = 3


class PathSpaceTooLarge(KDError):
    exit_code = 3


class BudgetExceeded(KDError):
    exit_code = 3
