"""Exception types shared across modules."""


class ArrangeError(Exception):
    """Base class for every package-specific error."""


class NotAdmissible(ArrangeError):
    """A flat's codimension is not a multiple of the member codimension.

    Carries the admissibility report so callers can render the certificate.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotRankOne(ArrangeError):
    """Operation is only defined for codimension-one (hypersurface) models."""
