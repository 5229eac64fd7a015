"""Sheaf-based multi-view consistency checking on finite architectural sites."""

from .consistency import (
    Conflict,
    ConflictReport,
    FamilyMember,
    GluingResult,
    LocalFamily,
    check_pairwise,
    glue,
    oracle_equivalence,
    pairwise_check_count,
    verify_unique,
)
from .errors import (
    ArchSheafError,
    CapExceededError,
    IncompatibleFamilyError,
    NotASubsetError,
    UnknownViewError,
)
from .ingest import Architecture, Diagnostic, load, parse, serialize, validate
from .presheaf import (
    ParameterDomain,
    PresheafSpec,
    Section,
    check_functor_laws,
    enumerate_sections,
    restrict,
    section_count,
)
from .properties import PropertyMap, apply_property, derived_glue_commutes
from .topology import InterfacePoint, OpenSet, SiteSpec, ViewDecl, intersect, is_cover, union_all, view_open

__version__ = "0.1.0"

__all__ = [
    "Conflict",
    "ConflictReport",
    "FamilyMember",
    "GluingResult",
    "LocalFamily",
    "check_pairwise",
    "glue",
    "oracle_equivalence",
    "pairwise_check_count",
    "verify_unique",
    "ArchSheafError",
    "CapExceededError",
    "IncompatibleFamilyError",
    "NotASubsetError",
    "UnknownViewError",
    "ParameterDomain",
    "PresheafSpec",
    "Section",
    "check_functor_laws",
    "enumerate_sections",
    "restrict",
    "section_count",
    "InterfacePoint",
    "OpenSet",
    "SiteSpec",
    "ViewDecl",
    "intersect",
    "is_cover",
    "union_all",
    "view_open",
    "Architecture",
    "Diagnostic",
    "load",
    "parse",
    "serialize",
    "validate",
    "PropertyMap",
    "apply_property",
    "derived_glue_commutes",
]
