"""Finite-domain constraint engine with optional intervals and branch-and-bound search."""

from .propagators import (
    Circuit,
    CircuitPrecedence,
    CondEq,
    CumulativeTimetable,
    Disjunctive,
    Implication,
    LinearLeq,
    LinkStartEnd,
    MaxEndEnergy,
    MaxOf,
    ObjectiveBound,
    Precedence,
    SpanMin,
    SumPresenceEq,
    linear_eq,
)
from .search import Search, SearchOutcome, SearchParams, SearchStats, Status
from .store import Inconsistent, IntervalVar, Propagator, Store

__all__ = [
    "Circuit",
    "CircuitPrecedence",
    "CondEq",
    "CumulativeTimetable",
    "Disjunctive",
    "Implication",
    "Inconsistent",
    "IntervalVar",
    "LinearLeq",
    "LinkStartEnd",
    "MaxEndEnergy",
    "MaxOf",
    "ObjectiveBound",
    "Precedence",
    "Propagator",
    "Search",
    "SearchOutcome",
    "SearchParams",
    "SearchStats",
    "SpanMin",
    "Status",
    "Store",
    "SumPresenceEq",
    "linear_eq",
]
