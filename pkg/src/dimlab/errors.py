"""Exception types shared across dimlab."""


class DimlabError(Exception):
    """Base class for all dimlab errors."""


class DimensionMismatch(DimlabError, ValueError):
    pass


class InvalidSystem(DimlabError, ValueError):
    pass


class BudgetExceeded(DimlabError):
    """Raised when a universe or enumeration would exceed its configured cap."""


class BracketError(DimlabError):
    """A root bracket does not straddle the target value."""


class Infeasible(DimlabError):
    pass


class ZeroMassBall(DimlabError):
    def __init__(self, n, message=None):
        self.n = n
        super().__init__(message or f"Bowen ball at depth n={n} has zero mass")
