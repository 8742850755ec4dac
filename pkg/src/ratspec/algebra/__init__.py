"""Numeric substrate: scalars, dense polynomials, roots, resultants."""

from .poly import Poly, compose_pair, homogeneous_eval, poly_gcd
from .resultant import resultant, resultant_homogeneous, sylvester_matrix
from .roots import RootCluster, poly_roots
from .scalars import (
    MIN_PREC,
    BigComplex,
    GaussianRational,
    context,
    decimal_digits,
    scalar_from_string,
)

__all__ = [
    "BigComplex",
    "GaussianRational",
    "MIN_PREC",
    "Poly",
    "RootCluster",
    "compose_pair",
    "context",
    "decimal_digits",
    "homogeneous_eval",
    "poly_gcd",
    "poly_roots",
    "resultant",
    "resultant_homogeneous",
    "scalar_from_string",
    "sylvester_matrix",
]
