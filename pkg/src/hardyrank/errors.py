"""Exception types raised by the workbench."""


class HardyRankError(Exception):
    """Base class for all workbench errors."""


class InvalidZeroError(HardyRankError, ValueError):
    """A Blaschke zero lies outside the allowed disk or the constant is not unimodular."""


class DegenerateInnerError(HardyRankError, ValueError):
    """The operation needs an inner function of degree at least one."""


class CoverageError(HardyRankError):
    """A span failed to cover its target frame within tolerance."""

    def __init__(self, message, residual=None, worst=None):
        super().__init__(message)
        self.residual = residual
        self.worst = worst


class WindowOverflowError(HardyRankError, ValueError):
    """Requested shifts push coefficients past the safe window."""


class ZeroInputError(HardyRankError, ValueError):
    """A vector that must be nonzero was zero."""


class PreconditionError(HardyRankError):
    """A hypothesis of the semi-invariant compression step does not hold."""

    def __init__(self, hypothesis, value):
        super().__init__(f"precondition violated: {hypothesis} (residual {value:.3e})")
        self.hypothesis = hypothesis
        self.value = value
