"""Exception hierarchy shared by all phaseode modules."""


class PhaseODEError(Exception):
    """Base class for solver failures."""


class ArgumentError(PhaseODEError, ValueError):
    pass


class DomainError(PhaseODEError, ValueError):
    """Evaluation point outside the interval of an expansion."""


class RefinementError(PhaseODEError):
    """Adaptive bisection hit the minimum width without resolving a function."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ConvergenceError(PhaseODEError):
    """An iteration (root finding, Newton) did not converge."""


class DegeneracyError(PhaseODEError):
    """Eigenvalue branches coalesce (turning point)."""


class IllConditionedError(PhaseODEError):
    """The cyclic-vector transformation is too ill-conditioned at some point."""

    def __init__(self, message, t=None, cond=None):
        super().__init__(message)
        self.t = t
        self.cond = cond


class LevinError(PhaseODEError):
    """The Levin Newton iteration failed on the window."""


class DuplicateBranchError(LevinError):
    pass


class StiffError(PhaseODEError):
    """The stiff Riccati marcher could not advance."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SingularSystemError(PhaseODEError):
    """A linear solve for initial or boundary data was numerically singular."""


class PhaseOverflowError(PhaseODEError, OverflowError):
    pass
