"""Exception types shared by all modules."""

from __future__ import annotations


class EllipticRMatrixError(Exception):
    """Base class for package errors."""


class DomainError(EllipticRMatrixError, ValueError):
    """Argument outside the domain of the requested object."""


class PoleError(EllipticRMatrixError, ValueError):
    """Evaluation requested too close to a pole.

    Attributes:
        point: the offending argument.
        nearest: the nearest lattice point ``m + n*tau`` (or another pole location).
        where: free-form tag naming the term that hit the pole.
    """

    def __init__(self, message: str, point=None, nearest=None, where=None):
        super().__init__(message)
        self.point = point
        self.nearest = nearest
        self.where = where


class AdmissibilityError(EllipticRMatrixError, ValueError):
    """IRF face or height configuration that is not admissible."""


class ResourceGuardError(EllipticRMatrixError, RuntimeError):
    """Problem size exceeds a configured guard."""


class ExtrapolationError(EllipticRMatrixError, ArithmeticError):
    """Richardson extrapolation did not settle."""
