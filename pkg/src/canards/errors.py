"""Exception types shared across the package."""


class CanardsError(Exception):
    """Base class for library errors."""


class PreconditionError(CanardsError, ValueError):
    """An input violates a documented precondition."""


class DomainError(CanardsError, ValueError):
    """A non-differentiable primitive was hit while propagating a jet."""


class FoldError(CanardsError, ArithmeticError):
    """The constrained flow is singular because the state lies on the fold."""


class ConvergenceError(CanardsError, RuntimeError):
    """An iterative solver did not converge."""


class BranchAbsent(ConvergenceError):
    """The tracked solution branch does not exist at these parameters."""


class StepSizeUnderflow(CanardsError, RuntimeError):
    """The adaptive integrator could not take a step large enough to make progress."""

    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t={t!r} (h={h!r})")
        self.t = t
        self.h = h


class NoSignChange(CanardsError, ValueError):
    """A bracketing root finder got endpoints with the same sign."""


class HopfCertificateWarning(UserWarning):
    """A vanishing Hurwitz determinant did not coincide with an imaginary eigenpair."""
