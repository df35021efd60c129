"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit 2, regime/cutoff/capacity problems exit 3, failed checks exit 1.
"""


class SingularBasisError(ValueError):
    """Lattice basis is singular (zero determinant)."""


class CapacityError(RuntimeError):
    """An enumeration would exceed its configured point cap."""


class ConjugatePointError(ValueError):
    """Endpoints are conjugate or coincident; the requested object is undefined."""


class CutoffExceededError(ValueError):
    """A query exceeds the frequency cutoff of a spectral series."""


class RegimeError(ValueError):
    """Arguments fall outside the validity regime of the chosen method."""


class ResolutionError(ValueError):
    """A quadrature rule is too coarse for the requested frequencies."""


class ConfigError(ValueError):
    """Run configuration is missing fields or holds invalid values."""
