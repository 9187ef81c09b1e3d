"""Floer homology of combinatorial homoclinic tangles of planar maps."""
from .chain import equivariant_boundary, quotient_boundary
from .grading import resolve_grading, validate_grading
from .homology import cohomology_of, rank_growth_check, smith_normal_form, zeta_sequence
from .moves import apply_move, classify_move, invariance_check, parse_move, primary_move_maps
from .tangle import Point, Tangle, emit_tangle, from_representatives, iterate, load, parse_tangle, validate

__version__ = "0.1.0"

__all__ = [
    "Point", "Tangle", "load", "parse_tangle", "emit_tangle", "from_representatives", "validate", "iterate",
    "resolve_grading", "validate_grading", "quotient_boundary", "equivariant_boundary",
    "smith_normal_form", "cohomology_of", "zeta_sequence", "rank_growth_check",
    "parse_move", "apply_move", "classify_move", "primary_move_maps", "invariance_check",
]
