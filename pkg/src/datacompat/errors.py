"""Shared exception types for configuration and oracle failures."""


class ConfigError(ValueError):
    """An instance description violates one of its invariants.

    Messages always name the violated invariant so that CLI users can fix
    the offending config field.
    """


class PreconditionError(ValueError):
    """A diagnostic routine was invoked outside its guaranteed regime.

    Raised instead of silently returning a vacuous result, so property tests
    cannot pass by accident on invalid inputs.
    """


class InfeasibleReferenceError(RuntimeError):
    """The oracle found no feasible grid point for the requested criteria.

    Raised when the representative set of the constrained-solution region is
    empty, e.g. gamma = 0 on a family whose intersection misses every grid
    point.
    """
