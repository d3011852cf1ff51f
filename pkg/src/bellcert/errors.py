"""Exception types raised across the package."""


class BellCertError(Exception):
    """Base class for all package errors."""


class DimensionError(BellCertError, ValueError):
    """Operand shapes or subsystem dimensions do not fit together."""


class NotHermitianError(BellCertError, ValueError):
    pass


class InvalidStateError(BellCertError, ValueError):
    pass


class POVMError(BellCertError, ValueError):
    """A candidate measurement fails completeness or positivity."""


class LayoutError(BellCertError, ValueError):
    """A vector does not match the event-vector layout it is used with."""


class ScenarioTooLargeError(BellCertError, ValueError):
    pass


class InconsistentDataError(BellCertError, ValueError):
    """Probability data that no density matrix reproduces."""
