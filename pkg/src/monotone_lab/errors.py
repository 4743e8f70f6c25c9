"""Exception types shared across the package."""


class GridError(ValueError):
    """Invalid grid parameters, or an operation unsupported on this grid kind."""


class DimensionMismatchError(ValueError):
    """Two objects refer to different grids or incompatible shapes."""


class OrderError(ValueError):
    """An order-relation precondition failed (for example a not below b)."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class NumericalError(RuntimeError):
    """A numerical operation failed (non-finite state, singular solve)."""


class EscapeError(NumericalError):
    """The trajectory left the inflated trapping box.

    Carries the iteration (map applications completed), the time step index
    within the current period when applicable, and the offending sup-norm.
    """

    def __init__(self, message, iteration=0, step=None, sup=None):
        super().__init__(message)
        self.iteration = iteration
        self.step = step
        self.sup = sup
