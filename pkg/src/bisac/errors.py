"""Exception types shared across the package."""


class UnobservableError(ValueError):
    """The requested bound is infinite: no signal energy reaches the unknown."""


class InfeasibleError(ValueError):
    """The constraint set is empty for the given scene (e.g. SINR too high)."""


class NumericalError(RuntimeError):
    """A numeric routine left its validated regime (residues, non-convergence)."""
