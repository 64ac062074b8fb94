"""Exception types shared across the package."""


class PinchlabError(Exception):
    """Base class."""


class MeshError(PinchlabError, ValueError):
    """Invalid or unparsable mesh."""


class HypothesisViolation(PinchlabError):
    """The surface does not satisfy (and cannot be scaled to satisfy) K >= 1."""


class SolverError(PinchlabError, RuntimeError):
    """The eigensolver failed to reach the requested residual.

    Attributes
    ----------
    best_residual : float
        Largest relative residual among the returned pairs.
    """

    def __init__(self, msg, best_residual=float("nan")):
        super().__init__(msg)
        self.best_residual = best_residual


class NearConjugate(PinchlabError, ValueError):
    """Boundary comparison requested with ``sin(l)`` below the guard."""


class NoAntipode(PinchlabError, ValueError):
    """Base point has no near-antipode."""


class EmptyEquator(PinchlabError, ValueError):
    """The almost-equator threshold set is empty."""


class PathTooShort(PinchlabError, ValueError):
    """Geodesic path too short for the finite-difference stencil."""
