"""Exception types shared across the package."""


class WsvtError(Exception):
    """Base class for all package-specific errors."""


class NumericalError(WsvtError):
    """A numerical routine failed (SVD non-convergence, divergence).

    ``iteration`` carries the solver iteration index when the failure
    happened inside an iterative method, else None.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateInputError(WsvtError):
    """Input is formally valid but degenerate for the requested operation
    (singular/ill-conditioned weight matrix, all-zero foreground, empty
    background index set, ground truth without positive pixels)."""
