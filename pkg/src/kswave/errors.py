"""Exception types shared across the package."""


class KswaveError(Exception):
    """Base class for package-specific failures."""


class ConfigError(KswaveError, ValueError):
    """A configuration value violates its stated precondition."""


class DomainTooSmallError(ConfigError):
    """The simulation domain cannot contain the front for the requested horizon."""


class BlowUpError(KswaveError, FloatingPointError):
    """The explicit stepper produced a non-finite value.

    Attributes
    ----------
    t : float
        Simulation time at which the non-finite value appeared.
    node : int
        Index of the first offending grid node.
    """

    def __init__(self, t, node):
        self.t = t
        self.node = node
        super().__init__(f"non-finite value at t={t:.6g}, node {node}")


class ConvergenceError(KswaveError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""
