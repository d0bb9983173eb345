"""Exception types raised across the package."""


class BregquantError(Exception):
    pass


class DomainError(BregquantError, ValueError):
    """A point lies outside the open domain of a generator."""


class BoundViolation(BregquantError, ValueError):
    """User-supplied Lipschitz / convexity constants contradict a computed divergence."""


class DegenerateBoundary(BregquantError, ArithmeticError):
    """F'(v) - F'(u) is too small to locate the cell boundary between u and v."""


class OrderingError(BregquantError, ValueError):
    pass


class DegenerateCodes(BregquantError, ValueError):
    pass


class QuadratureError(BregquantError, ArithmeticError):
    pass


class ZeroWeightCell(BregquantError, ArithmeticError):
    pass


class NotStationary(BregquantError, ValueError):
    pass


class ShapeError(BregquantError, ValueError):
    pass


class NotConverged(BregquantError, RuntimeError):
    """Solver hit ``max_iter``; the best iterate and trace ride along."""

    def __init__(self, message, codes=None, cuts=None, trace=None):
        super().__init__(message)
        self.codes = codes
        self.cuts = cuts
        self.trace = trace


class OrderCollapse(BregquantError, RuntimeError):
    """Two codes merged during iteration."""
