"""Homotopy invariants: windings, Stiefel classes, Fredholm indices."""
from .fredholm import (
    ExtensionClass,
    FiniteIndex,
    InfiniteDefect,
    StructuredOperator,
    compose,
    fredholm_index,
    kernel_dimensions,
)
from .homotopy import homotopy_certificate, homotopy_equivalent, validate_certificate
from .stabilized import level_invariants, stabilized_invariant
from .stiefel import InvariantRecord, det_winding, oriented_cycles, stiefel_class
from .winding import sample_loop, winding_number

__all__ = [
    "ExtensionClass",
    "FiniteIndex",
    "InfiniteDefect",
    "InvariantRecord",
    "StructuredOperator",
    "compose",
    "det_winding",
    "fredholm_index",
    "homotopy_certificate",
    "homotopy_equivalent",
    "kernel_dimensions",
    "level_invariants",
    "oriented_cycles",
    "sample_loop",
    "stabilized_invariant",
    "stiefel_class",
    "validate_certificate",
    "winding_number",
]
