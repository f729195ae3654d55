"""Exception types shared across the package.

Solver errors carry enough state to diagnose the failure (iteration counts,
residuals, period vectors) without re-running the solve.
"""

from __future__ import annotations


class HardycondError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------- geometry


class OverlappingHoles(HardycondError):
    pass


class HoleOutsideDisk(HardycondError):
    pass


class BadAnnulusRadius(HardycondError):
    pass


class EpsilonTooLarge(HardycondError):
    pass


class BadResolution(HardycondError):
    pass


class GridMismatch(HardycondError):
    """Two fields that must share a grid do not."""


class PointTooCloseToBoundary(HardycondError):
    pass


# ---------------------------------------------------------------- fields


class KappaViolated(HardycondError):
    """A dilatation field has sup norm >= 1 (ellipticity lost)."""


class BadData(HardycondError):
    """Boundary data contains NaN or infinite entries."""


class ZeroField(HardycondError):
    """An operation that needs a nonzero field received the zero field."""


# ---------------------------------------------------------------- solvers


class SolverFailure(HardycondError):
    """A reference (oracle) solve failed; indicates a broken test setup."""


class NoConvergence(HardycondError):
    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class SingularSystem(HardycondError):
    def __init__(self, message: str, singular_values=None):
        if singular_values is not None:
            message = f"{message} (smallest singular values: {singular_values})"
        super().__init__(message)
        self.singular_values = singular_values


class CompatibilityViolated(HardycondError):
    """Requested a single-valued conjugate but the flux periods do not vanish."""

    def __init__(self, message: str, periods):
        super().__init__(f"{message} (periods={periods})")
        self.periods = periods


class CompatibilityUnreachable(HardycondError):
    pass


class MeanNotZero(HardycondError):
    pass


class BudgetUnreachable(HardycondError):
    pass


class IllConditioned(HardycondError):
    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(f"{message} (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


class ConfigError(HardycondError):
    """Bad or inconsistent run configuration."""
