"""Exception types shared across the package."""


class TriadicNetError(Exception):
    """Base class for all package-specific errors."""


class DegenerateRegimeError(TriadicNetError):
    """Raised when the drift cubic has a (near-)repeated root.

    This happens exactly on the boundary between the one-equilibrium and
    three-equilibria parameter regions, where the regime tag is ambiguous.
    """


class StuckStateError(TriadicNetError):
    """Raised when the total reaction propensity is zero and no event can fire."""


class ReducibleChainError(TriadicNetError):
    """Raised when a birth-death chain has a zero rate on the interior, so the
    stationary product formula does not apply."""


class SingularSystemError(TriadicNetError):
    """Raised when a linear solve that should be well posed fails."""


class AccuracyError(TriadicNetError):
    """Raised when a numerical result fails its built-in accuracy check."""


class ConfigError(TriadicNetError):
    """Raised for invalid experiment configurations.

    Carries the full list of violations in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
