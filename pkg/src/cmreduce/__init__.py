"""Reduction types of CM Jacobians: prediction from prime splitting, verification by point counting."""

from .curves import (
    FermatCurve,
    PointCountSequence,
    SuperellipticCurve,
    chebyshev_poly,
    count_points,
    count_sequence,
    good_prime,
    parse_curve,
)
from .finite_field import FieldContext, FieldElement, fiber_count, find_irreducible
from .lfunction import LPolynomial, NewtonPolygon, charpoly, classify, lpoly_from_counts, newton_polygon, p_rank, validate
from .splitting import (
    CompositeReal,
    Cyclotomic,
    mult_order,
    predict_reduction,
    predict_slopes,
    quotient_order,
    splitting,
)

__version__ = "0.1.0"
