"""Destabilization of finite-dimensional algebras carrying matrix units.

An algebra ``A`` with an embedded copy of ``M_n`` factors as
``C (x) M_n`` where ``C`` is the relative commutant of the units.  The
package computes these factorizations with certificates, extends them to
Hilbert bimodules and correspondences, and checks the functorial laws.
"""

from .algebra import DEFAULT_TOL, StarAlgebra, Tolerance, full_matrix_algebra, generate_star_algebra, kron, scalars
from .bimodules import (
    BimoduleUnits,
    HilbertBimodule,
    LinkingAlgebraPresentation,
    bimodule_relative_commutant,
    bimodule_roundtrip_check,
    bimodule_theta,
    build_linking,
    external_tensor_bimodule,
    fullness,
)
from .category import (
    KAlgMorphism,
    conjugacy_test,
    destabilize_morphism,
    equivalence_suite,
    lift_isomorphism,
    naturality_check,
    stabilize_morphism,
    stabilize_object,
)
from .correspondences import (
    Correspondence,
    CorrespondenceIso,
    compact_operators,
    correspondence_destabilize,
    correspondence_theta,
    external_tensor_correspondence,
    find_correspondence_iso,
    interior_tensor,
    standard_correspondence,
    theta_assoc,
    verify_correspondence_iso,
)
from .destabilization import KAlgebra, destabilize, relative_commutant, theta
from .errors import DestabError, InvalidInputError, TheoremViolation
from .morphisms import NdMorphism
from .report import Report
from .units import MatrixUnitSystem, amplify_units, standard_units, validate_matrix_units

__version__ = "0.1.0"

__all__ = [
    "BimoduleUnits",
    "Correspondence",
    "CorrespondenceIso",
    "DEFAULT_TOL",
    "DestabError",
    "HilbertBimodule",
    "InvalidInputError",
    "KAlgMorphism",
    "KAlgebra",
    "LinkingAlgebraPresentation",
    "MatrixUnitSystem",
    "NdMorphism",
    "Report",
    "StarAlgebra",
    "TheoremViolation",
    "Tolerance",
    "amplify_units",
    "bimodule_relative_commutant",
    "bimodule_roundtrip_check",
    "bimodule_theta",
    "build_linking",
    "compact_operators",
    "conjugacy_test",
    "correspondence_destabilize",
    "correspondence_theta",
    "destabilize",
    "destabilize_morphism",
    "equivalence_suite",
    "external_tensor_bimodule",
    "external_tensor_correspondence",
    "find_correspondence_iso",
    "full_matrix_algebra",
    "fullness",
    "generate_star_algebra",
    "interior_tensor",
    "kron",
    "lift_isomorphism",
    "naturality_check",
    "relative_commutant",
    "scalars",
    "stabilize_morphism",
    "stabilize_object",
    "standard_correspondence",
    "standard_units",
    "theta",
    "theta_assoc",
    "validate_matrix_units",
    "verify_correspondence_iso",
]
