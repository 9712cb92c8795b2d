"""Exception types raised across the package."""


class FairbreakError(Exception):
    """Base class for all package errors."""


class SupportMismatch(FairbreakError):
    pass


class InvalidFraction(FairbreakError):
    pass


class InvalidMass(FairbreakError):
    pass


class DimensionError(FairbreakError):
    pass


class UndefinedGap(FairbreakError):
    """A conditioning event of the fairness gap has zero mass."""


class UndefinedBound(FairbreakError):
    """All four cell probabilities are zero, so C(h, D) has no denominator."""


class DegenerateCase(FairbreakError):
    pass


class InvalidMargin(FairbreakError):
    pass


class CaseNotApplicable(FairbreakError):
    pass


class BudgetError(FairbreakError):
    pass


class TrainingDiverged(FairbreakError):
    pass


class Infeasible(FairbreakError):
    pass


class SingularCovariance(FairbreakError):
    pass


class NoConvergence(FairbreakError):
    pass


class InstanceTooLarge(FairbreakError):
    pass


class FormatError(FairbreakError):
    """Malformed CSV, model or config file."""
