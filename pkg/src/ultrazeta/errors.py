"""Exception types shared across the package."""


class UltrazetaError(Exception):
    """Base class for all package errors."""


class Inexact(UltrazetaError):
    """Finite-precision data cannot resolve the requested quantity."""


class DivergentIntegral(UltrazetaError):
    """An integral or norm diverges for the given parameters.

    ``multiplier`` names the offending factor when known.
    """

    def __init__(self, message, multiplier=None):
        super().__init__(message)
        self.multiplier = multiplier


class PoleOfGamma(UltrazetaError):
    """The p-adic gamma factor is evaluated at (or too close to) a pole."""

    def __init__(self, message, alpha=None, nearest=None):
        super().__init__(message)
        self.alpha = alpha
        self.nearest = nearest


class PoleProximity(UltrazetaError):
    """Evaluation point is too close to a predicted pole."""

    def __init__(self, message, s=None, pole=None):
        super().__init__(message)
        self.s = s
        self.pole = pole


class NoSolution(UltrazetaError):
    """Rational reconstruction has no solution at the given degree bounds."""


class AmbiguousSolution(UltrazetaError):
    """A reconstructed rational function failed held-out verification."""


class NondegeneracyFailed(UltrazetaError):
    """The reduction mod pi has a singular zero away from the origin."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(UltrazetaError):
    """A point-counting or refinement budget was exhausted."""


class UnsupportedPolynomial(UltrazetaError):
    """The operation is only implemented for a restricted polynomial class."""
