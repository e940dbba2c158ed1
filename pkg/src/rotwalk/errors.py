"""Exception hierarchy shared by all rotwalk modules.

Two broad families matter to callers (and to the CLI exit-code mapping):
configuration/parameter problems versus numeric or regime problems that
only surface once a computation is attempted.
"""


class RotwalkError(Exception):
    """Base class for all rotwalk errors."""


class ParameterError(RotwalkError, ValueError):
    """Invalid law/config parameter (rho2 <= 0, q <= 1, bad law string, ...)."""


class DomainError(RotwalkError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateCovarianceError(DomainError):
    """Joint Gaussian computation requested at |D_n(theta)| = 1."""


class RegimeError(RotwalkError):
    """Analytic bound is vacuous for these parameters (wrong asymptotic regime)."""


class ThresholdTooSmallError(RegimeError):
    """Directional split threshold psi(n) <= 0; the bound cannot be assembled."""


class UndefinedSlopeError(RotwalkError):
    """Dimension slope requested on all-zero (or too few) level counts."""


class ScheduleRejectedError(RotwalkError):
    """A Frostman level schedule hit a subtree with zero mass; retry with
    another schedule or a denser tree."""

    def __init__(self, level: int, parent_index: int):
        self.level = level
        self.parent_index = parent_index
        super().__init__(
            f"subtree sum at level {level} vanishes under mass-carrying "
            f"parent {parent_index}; level schedule rejected"
        )
