"""Construction and numerical verification of isoclinic subspace families
through generalized Knill-Laflamme conditions."""

from .errors import IsoklError
from .linalg import DEFAULT_TOL, Tolerance

__version__ = "0.1.0"

__all__ = ["IsoklError", "Tolerance", "DEFAULT_TOL", "__version__"]
