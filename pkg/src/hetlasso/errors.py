"""Exception types shared across the package."""


class HetLassoError(Exception):
    pass


class DimensionMismatch(HetLassoError, ValueError):
    pass


class NonFiniteValue(HetLassoError, ValueError):
    pass


class NotPositiveDefinite(HetLassoError, ArithmeticError):
    pass


class SingularGram(NotPositiveDefinite):
    """X(S)^T X(S) failed the Cholesky test, so the KKT reduction does not apply."""


class NonSymmetric(HetLassoError, ValueError):
    pass


class NoConvergence(HetLassoError, ArithmeticError):
    pass


class ZeroColumn(HetLassoError, ValueError):
    pass


class DomainError(HetLassoError, ValueError):
    pass


class InfeasibleTarget(HetLassoError, ValueError):
    pass
