"""Exception hierarchy for relkit."""


class RelkitError(Exception):
    """Base class for all relkit errors."""


class DimensionError(RelkitError, ValueError):
    """Operands live in incompatible spaces."""


class ConsistencyError(RelkitError):
    """Two characterizations that must agree did not.

    This signals tolerance breakdown rather than bad input.
    """


class NotAnOperator(RelkitError):
    """A relation with nontrivial multivalued part was used as an operator."""


class InvalidProjector(RelkitError):
    """The projector does not leave the multivalued part invariant."""


class ConditionViolation(RelkitError):
    """A subspace fails an admissibility condition for a decomposition.

    Attributes
    ----------
    clause : str
        Name of the failing condition.
    residual : float
        Numerical size of the violation.
    """

    def __init__(self, clause, message, residual=float("nan")):
        super().__init__(f"{clause}: {message}")
        self.clause = clause
        self.residual = residual


class NotSingular(RelkitError):
    pass


class NotOrthogonal(RelkitError):
    pass


class NotDominated(RelkitError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class StaleWitness(NotDominated):
    """A witness no longer certifies the claimed domination."""


class NotRegular(RelkitError):
    pass


class MonotonicityViolation(RelkitError):
    pass


class NotInGraph(RelkitError):
    pass


class NonConcaveAscent(RelkitError):
    """The outer maximization could not be solved reliably.

    ``best_bound`` carries the best sampled lower bound.
    """

    def __init__(self, message, best_bound=float("nan")):
        super().__init__(message)
        self.best_bound = best_bound
        self.degraded = True


class NotPSD(RelkitError, ValueError):
    pass


class NoConvergence(RelkitError):
    def __init__(self, message, last=None, gap=float("nan")):
        super().__init__(message)
        self.last = last
        self.gap = gap
