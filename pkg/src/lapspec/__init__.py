"""lapspec: exact spectral functions of the Laplacian on model manifolds,
geodesic trigonometric expansions, and growth-theorem verification scans."""

from . import apx, geometry, harness, specialfn, spectra, zeta

__version__ = "0.1.0"

__all__ = ["apx", "geometry", "harness", "specialfn", "spectra", "zeta", "__version__"]
