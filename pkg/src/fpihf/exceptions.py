"""Exception types raised by the solvers."""


class ConfigurationError(ValueError):
    """A step size or parameter violates the convergence condition.

    The message names the violated inequality.
    """


class DivergenceError(ArithmeticError):
    """An iterate became non-finite."""


class InnerSolveError(RuntimeError):
    """The inner inclusion oracle returned an inconsistent pair."""
