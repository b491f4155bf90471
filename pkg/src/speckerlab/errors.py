"""Exception types shared across the package."""


class SpeckerLabError(Exception):
    pass


class NoNonzeroKernel(SpeckerLabError):
    """The matrix is injective over the rationals; no nonzero solution exists."""


class HorizonExceeded(SpeckerLabError):
    """A value beyond a finite table was requested; enlarge the table or horizon."""


class DominationFails(SpeckerLabError):
    """The bound function is not strictly below the scale on the requested window."""


class AuditFailure(SpeckerLabError):
    """A verifier inequality failed; indicates a bug or a corrupted artifact."""

    def __init__(self, location, detail=""):
        self.location = location
        self.detail = detail
        super().__init__(f"{location}: {detail}" if detail else location)


class StageMissing(SpeckerLabError):
    """A combination referenced a stage that is not in the family."""
