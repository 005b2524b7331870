"""Exact verification of the relative Du Bois tower for one-parameter families."""

from .linalg import LinAlgError, RatMatrix
from .complexes import ChainMap, CochainComplex, ComplexError, WeightMismatch, cone, quasi_iso
from .filtered import FilteredComplex, FiltrationError, bete_filtration, check_ses
from .dubois import (
    CheckReport,
    DuBoisTower,
    Finding,
    TowerError,
    WedgeOperator,
    abs_to_rel_triangles,
    build_tower,
    check_assoc_graded,
    graded_quotient,
    induce_tower_morphism,
    stationary_check,
    verify_functorial_diagram,
    verify_ses_tower,
    verify_subcomplex,
)

__version__ = "0.1.0"

__all__ = [
    "ChainMap",
    "CheckReport",
    "CochainComplex",
    "ComplexError",
    "DuBoisTower",
    "FilteredComplex",
    "FiltrationError",
    "Finding",
    "LinAlgError",
    "RatMatrix",
    "TowerError",
    "WedgeOperator",
    "WeightMismatch",
    "abs_to_rel_triangles",
    "bete_filtration",
    "build_tower",
    "check_assoc_graded",
    "check_ses",
    "cone",
    "graded_quotient",
    "induce_tower_morphism",
    "quasi_iso",
    "stationary_check",
    "verify_functorial_diagram",
    "verify_ses_tower",
    "verify_subcomplex",
]
