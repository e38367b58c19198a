"""Extensions of Hilbert C*-modules over simplicial spaces and their homotopy invariants."""
from .bundle import (
    ProjectionField,
    corona_limit,
    projection_field_from_map,
    trivial_bundle,
)
from .errors import HilbextError, LiftFailure, NonStabilizing, Unstable, ValidationError
from .extension import (
    ExtensionTriple,
    WindingDatum,
    build_split_extension,
    build_Wk_extension,
    busby_invariant,
    check_exactness,
    check_fullness,
    extension_from_busby,
    membership_Wk,
)
from .hilbmod import (
    ModuleMorphism,
    SectionField,
    check_morphism,
    fiber_quotient_norm,
    inner_product,
)
from .invariants import (
    FiniteIndex,
    InfiniteDefect,
    InvariantRecord,
    StructuredOperator,
    compose,
    fredholm_index,
    homotopy_certificate,
    homotopy_equivalent,
    stabilized_invariant,
    stiefel_class,
    winding_number,
)
from .isometry import (
    IsometryField,
    delta_to_isometry,
    isometry_to_delta,
    pullback_bundle,
    roundtrip_check,
)
from .mesh import SimplicialSpace, annulus_tower, build_annulus_mesh, build_disk_mesh

__version__ = "0.1.0"

__all__ = [
    "ExtensionTriple",
    "FiniteIndex",
    "HilbextError",
    "InfiniteDefect",
    "InvariantRecord",
    "IsometryField",
    "LiftFailure",
    "ModuleMorphism",
    "NonStabilizing",
    "ProjectionField",
    "SectionField",
    "SimplicialSpace",
    "StructuredOperator",
    "Unstable",
    "ValidationError",
    "WindingDatum",
    "annulus_tower",
    "build_Wk_extension",
    "build_annulus_mesh",
    "build_disk_mesh",
    "build_split_extension",
    "busby_invariant",
    "check_exactness",
    "check_fullness",
    "check_morphism",
    "compose",
    "corona_limit",
    "delta_to_isometry",
    "extension_from_busby",
    "fiber_quotient_norm",
    "fredholm_index",
    "homotopy_certificate",
    "homotopy_equivalent",
    "inner_product",
    "isometry_to_delta",
    "membership_Wk",
    "projection_field_from_map",
    "pullback_bundle",
    "roundtrip_check",
    "stabilized_invariant",
    "stiefel_class",
    "trivial_bundle",
    "winding_number",
]
