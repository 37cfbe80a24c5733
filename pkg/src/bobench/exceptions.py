"""Exception types shared across the package."""

from __future__ import annotations


class FactorizationError(ArithmeticError):
    """Cholesky factorization hit a non-positive pivot.

    Attributes
    ----------
    pivot_index : int
        Zero-based row index of the failing pivot.
    pivot_value : float
        The offending pivot value.
    """

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"non-positive pivot {pivot_value:.6g} at index {pivot_index}; "
            "matrix is not positive definite"
        )


class GpFitError(RuntimeError):
    """Gram matrix could not be factorized even after jitter escalation."""


class NumericError(ArithmeticError):
    """A quantity became non-finite during evaluation.

    Carries the point at which the failure occurred when one is known.
    """

    def __init__(self, message: str, point=None):
        self.point = point
        if point is not None:
            message = f"{message} at x={point!r}"
        super().__init__(message)


class ProposalError(RuntimeError):
    """Every restart of the inner optimizer failed."""


class BoRunError(RuntimeError):
    """A Bayesian-optimization run aborted part-way.

    The report accumulated up to the failure is available as
    ``partial_report``.
    """

    def __init__(self, message: str, partial_report=None):
        self.partial_report = partial_report
        super().__init__(message)
