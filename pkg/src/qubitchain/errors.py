"""Exception hierarchy shared across the package."""


class ChainError(Exception):
    """Base class for all qubitchain errors."""


class InvalidConfigError(ChainError, ValueError):
    """A chain or run configuration violates its invariants."""


class SolverError(ChainError, RuntimeError):
    """A numerical solver failed to produce a trustworthy result."""


class DefectiveBasisError(SolverError):
    """The eigenvector basis is (numerically) defective or ill-conditioned."""


class DegenerateSpectrumError(SolverError):
    """Repeated eigenvalues make the bi-orthogonal normalization ill-defined."""


class IntegrationError(SolverError):
    """Adaptive step control could not meet the requested tolerance."""


class GridTooCoarseError(ChainError, ValueError):
    """A sampled grid cannot resolve the requested feature."""
