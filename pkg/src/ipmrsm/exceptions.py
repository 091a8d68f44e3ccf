"""Exception hierarchy shared by every module of the package."""


class RSMError(Exception):
    """Base class for errors raised by ipmrsm."""


class InputError(RSMError, ValueError):
    """Invalid user-supplied data or arguments."""


class RankDeficiencyError(RSMError, ArithmeticError):
    """A model or Jacobian matrix lacks full column rank.

    Attributes
    ----------
    rank : int
        Numerical rank that was detected.
    columns : tuple of int
        Column indices judged linearly dependent on the others.
    """

    def __init__(self, message, rank=None, columns=()):
        super().__init__(message)
        self.rank = rank
        self.columns = tuple(columns)


class SingularityError(RSMError, ArithmeticError):
    """Model evaluated at or too close to a pole."""


class ConvergenceError(RSMError):
    """An iterative procedure failed to reach its stopping criterion."""
