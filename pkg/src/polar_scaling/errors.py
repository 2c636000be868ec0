"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ResolutionMismatchError(ValueError):
    """Two meshes that must share a resolution do not."""


class CacheCorruptionError(ValueError):
    """A mesh cache file has a bad header or the wrong payload size."""


class MemoryBudgetError(MemoryError):
    """A requested array would exceed the configured memory budget."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    ``best`` holds whatever the solver had when it gave up (a mesh, a grid
    pair, a report) and ``residual`` the last measured residual or delta.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
