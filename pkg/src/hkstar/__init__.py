"""Independent-set stars in trees: exact counts, star injections for
perfect trees and forests, and exhaustive verification tools."""

from .counting import (
    ClassSizes,
    count_classes,
    count_star,
    enumerate_independent_sets,
    independence_number,
    independence_profile,
    star_profile,
)
from .errors import InvariantViolation, PreconditionError
from .forest import LeafSelection, arity_map, best_leaf, forest_count_star, level_map
from .injections import TraceEvent, cas, map_star, phi_even, phi_odd
from .kernels import BACKEND
from .trees import (
    Forest,
    PerfectShape,
    RootedTree,
    build_perfect,
    canonical_code,
    enumerate_unlabeled_trees,
    leftmost_path,
    load_forest,
    load_tree,
    parse_forest,
    parse_tree,
)
from .verify import HkReport, Verdict, check_hk, check_injection_exhaustive, check_theorem_main, generate_family

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ClassSizes", "Forest", "HkReport", "InvariantViolation", "LeafSelection", "PerfectShape",
    "PreconditionError", "RootedTree", "TraceEvent", "Verdict", "arity_map", "best_leaf", "build_perfect",
    "canonical_code", "cas", "check_hk", "check_injection_exhaustive", "check_theorem_main", "count_classes",
    "count_star", "enumerate_independent_sets", "enumerate_unlabeled_trees", "forest_count_star",
    "generate_family", "independence_number", "independence_profile", "leftmost_path", "level_map",
    "load_forest", "load_tree", "map_star", "parse_forest", "parse_tree", "phi_even", "phi_odd", "star_profile",
]
