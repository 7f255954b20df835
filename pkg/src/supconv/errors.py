"""Exception hierarchy shared by the library and the CLI."""


class SupconvError(Exception):
    """Base class for all library errors."""


class InputError(SupconvError, ValueError):
    """Malformed technology, scenario, or input vector."""


class CapabilityError(SupconvError):
    """The requested engine cannot handle this instance."""


class NonConcaveError(CapabilityError):
    """A concave-only engine was given a non-concave technology."""


class PreconditionError(SupconvError, ValueError):
    """A mathematical precondition (e.g. interior point) is violated."""


class BoundaryPointError(PreconditionError):
    """The input lies on the boundary of the nonnegative orthant."""


class GridCapError(CapabilityError):
    """Enumeration would exceed the configured size cap."""


class NumericalError(SupconvError, ArithmeticError):
    """Internal numerical failure (cycling guard, lost feasibility)."""


class SparsifyError(NumericalError):
    """No small firm subset reproduces the plan value within tolerance."""
