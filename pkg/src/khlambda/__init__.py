"""Khovanov homology over the discrete valuation ring Q[lambda]_(lambda)."""

from .dvr import DvrScalar, LAMBDA, ONE, ZERO, lam, parse_scalar
from .diagram import PlanarDiagram, parse_pd, mirror, resolve

__all__ = [
    "DvrScalar", "LAMBDA", "ONE", "ZERO", "lam", "parse_scalar",
    "PlanarDiagram", "parse_pd", "mirror", "resolve",
]
__version__ = "0.1.0"
