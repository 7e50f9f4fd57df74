"""Exception hierarchy shared by all hypersolve modules."""


class HypersolveError(Exception):
    """Base class for every error raised by hypersolve."""


class InputError(HypersolveError, ValueError):
    """Malformed or inconsistent input (shapes, JSON fields, options)."""


class CapabilityError(HypersolveError):
    """The requested operation is not available for this polynomial family."""


class SingularityError(HypersolveError):
    """The point is on (or numerically at) the boundary where p(x) = 0."""


class DegenerateDirectionError(HypersolveError):
    """p vanishes along the requested direction, so the restriction has no leading term."""


class NotHyperbolicError(HypersolveError):
    """A univariate restriction produced roots with non-negligible imaginary parts."""


class IndefiniteError(HypersolveError):
    """An assembled barrier Hessian failed the positive-definiteness check."""


class AssumptionError(HypersolveError):
    """A standing problem assumption (full row rank, c outside row space, b != 0) fails."""


class NumericalFailure(HypersolveError):
    """A computation finished but its result failed the residual checks."""


class InitializationError(HypersolveError):
    """The supplied initial point is infeasible or not strictly interior."""


class StepFailure(HypersolveError):
    """An affine-scaling step could not be completed.

    ``trace`` carries the per-iteration rows recorded so far when the failure
    surfaces from :func:`hypersolve.ipm.solve`.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
