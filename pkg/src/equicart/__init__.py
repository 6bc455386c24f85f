"""Exact-arithmetic workbench for torus-equivariant cohomology on finite
invariant models: Cartan-complex cohomology engines, the equivariant Poincare
pairing and duality diagnostics, Gysin morphisms solved from adjunction over
the fraction field, Thom/Euler classes, and fixed-point localization and
Lefschetz formulas, exposed as a library plus CLI."""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import (
    DEFAULT_SEED,
    MatrixF,
    Polynomial,
    Rational,
    RationalFunction,
    SolveResult,
    SpecializationError,
    UnsupportedRankError,
    generic_specialized_rank,
    invariant_factors,
    rank_and_solve,
    smith_normal_form,
)
from .duality import (
    DualityReport,
    ExtRank1,
    ModuleClassification,
    ModulePresentation,
    NonCompactModelError,
    Pairing,
    classify_rank1,
    duality_check,
    ext_rank1,
    integrate,
    is_torsion,
    pairing_matrix,
    presentation_from_model,
)
from .euler import (
    FixedPointDataError,
    FixedPointDatum,
    LinearRepresentation,
    LocalizationSum,
    NonIsolatedFixedPointError,
    Weight,
    euler_linear,
    lefschetz_number,
    localization_consistency,
    localize_integral,
    nested_euler_check,
)
from .gcomplex import (
    EquivariantElement,
    Generator,
    GenericCohomology,
    InvariantModel,
    MissingProductError,
    ModelStructureError,
    ValidationReport,
    cartan_differential,
    cohomology_generic,
    cohomology_hilbert,
    element,
    element_product,
    evaluate_at_point,
    named_cocycle_element,
    predict_free_hilbert,
    scale_contractions,
    underlying_cohomology_dims,
    validate_model,
)
from .gysin import (
    DecompositionError,
    GysinMatrix,
    MapStructureError,
    ModelMap,
    ObstructionError,
    adjunction_residuals,
    compose_maps,
    gysin_localized,
    identity_map,
    projection_formula_check,
    pullback_cohomology,
    restrict_map,
    restrict_subtorus,
    thom_extend,
    validate_map,
)
from .models import (
    ModelFile,
    ModelFileError,
    UnknownModelError,
    builtin,
    builtin_map,
    builtin_map_names,
    builtin_maps,
    builtin_names,
    c_alpha,
    circle_free,
    circle_trivial,
    load_model,
    load_model_file,
    obstruction_pair,
    point,
    rema_adj,
    resolve_model,
    s2_chain,
    s2_rotation,
    save_model,
    tensor_product,
)
from .cli import run

__all__ = [
    "DEFAULT_SEED",
    "DecompositionError",
    "DualityReport",
    "EquivariantElement",
    "ExtRank1",
    "FixedPointDataError",
    "FixedPointDatum",
    "Generator",
    "GenericCohomology",
    "GysinMatrix",
    "InvariantModel",
    "LinearRepresentation",
    "LocalizationSum",
    "MapStructureError",
    "MatrixF",
    "MissingProductError",
    "ModelFile",
    "ModelFileError",
    "ModelMap",
    "ModelStructureError",
    "ModuleClassification",
    "ModulePresentation",
    "NonCompactModelError",
    "NonIsolatedFixedPointError",
    "ObstructionError",
    "Pairing",
    "Polynomial",
    "Rational",
    "RationalFunction",
    "SolveResult",
    "SpecializationError",
    "UnknownModelError",
    "UnsupportedRankError",
    "ValidationReport",
    "Weight",
    "adjunction_residuals",
    "builtin",
    "builtin_map",
    "builtin_map_names",
    "builtin_maps",
    "builtin_names",
    "c_alpha",
    "cartan_differential",
    "circle_free",
    "circle_trivial",
    "classify_rank1",
    "cohomology_generic",
    "cohomology_hilbert",
    "compose_maps",
    "duality_check",
    "element",
    "element_product",
    "euler_linear",
    "evaluate_at_point",
    "ext_rank1",
    "generic_specialized_rank",
    "gysin_localized",
    "identity_map",
    "integrate",
    "invariant_factors",
    "is_torsion",
    "lefschetz_number",
    "load_model",
    "load_model_file",
    "localization_consistency",
    "localize_integral",
    "named_cocycle_element",
    "nested_euler_check",
    "obstruction_pair",
    "pairing_matrix",
    "point",
    "predict_free_hilbert",
    "presentation_from_model",
    "projection_formula_check",
    "pullback_cohomology",
    "rank_and_solve",
    "rema_adj",
    "resolve_model",
    "restrict_map",
    "restrict_subtorus",
    "run",
    "s2_chain",
    "s2_rotation",
    "save_model",
    "scale_contractions",
    "smith_normal_form",
    "tensor_product",
    "thom_extend",
    "underlying_cohomology_dims",
    "validate_map",
    "validate_model",
]
