"""Exact 1-parameter families over Q(i)(t): reduction, base change, rescaling."""

from .families import (
    FamilyMap,
    GoodReductionReport,
    MobiusFamily,
    RescalingProposal,
    RescalingResult,
    base_change,
    conjugate_family,
    iterate_family,
    newton_polygon,
    normalize_family,
    propose_rescalings,
    puiseux_branches,
    reduce_at_zero,
    rescaling_limit,
    root_valuations,
)
from .tparam import TParam, parse_tparam, tpoly

__all__ = [
    "FamilyMap",
    "GoodReductionReport",
    "MobiusFamily",
    "RescalingProposal",
    "RescalingResult",
    "TParam",
    "base_change",
    "conjugate_family",
    "iterate_family",
    "newton_polygon",
    "normalize_family",
    "parse_tparam",
    "propose_rescalings",
    "puiseux_branches",
    "reduce_at_zero",
    "rescaling_limit",
    "root_valuations",
    "tpoly",
]
