class OGKError(Exception):
    pass


class ConfigError(OGKError):
    """Bad identifier, file or option; raised before any computation."""


class UnboundedConjugate(OGKError):
    """The conjugate is infinite at the requested point (Phi grows at most linearly)."""


class DivergentRatio(OGKError):
    """A dilation ratio Phi(ab)/Phi(b) grows without bound on the sample grid."""


class NoMinimum(OGKError):
    """The Amemiya functional is monotone over the whole scan range."""


class UnknownUnit(OGKError):
    pass


class FiberMismatch(OGKError):
    pass


class NotGroupBundle(OGKError):
    pass


class NotProbability(OGKError):
    pass


class BoundViolated(OGKError):
    pass


class FiltrationInvalid(OGKError):
    pass


class NotDelta2(OGKError):
    """Young function rejected for a suite that needs the doubling condition."""
