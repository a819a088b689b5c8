"""Stratified taxonomical clustering and discovery of semantic web services.

Concepts get bit-vector codes whose OR decides subsumption; a service's
input and output concept sets fold into one code each, and services are
kept in one Hasse diagram per feature.
"""

__version__ = "0.1.0"

from .errors import (
    ClusterSpaceError,
    CycleDetected,
    MatchContractError,
    OntologyError,
    ServiceValidationError,
    StaleCodeError,
    STCError,
)
from .ontology import BCode, BaseOntology, Concept, DomainSpace, add_concept, baseonto_encode, load_ontology, subsumes
from .service import GCode, ServiceDescription, build_service, compute_gcode, feature_stratify, load_services, validate_service
from .matchmaker import EXACT, NO_MATCH, PLUG_IN, SIBLING, SUBSUME, MatchResult, MatchStrength, classify, g_subsumption
from .cluster import ClusterSpace, TaxonomyNode, converge
from .discovery import Query, RetrievalResult, build_query, discover, load_queries

__all__ = [
    "BCode", "BaseOntology", "ClusterSpace", "ClusterSpaceError", "Concept", "CycleDetected", "DomainSpace",
    "EXACT", "GCode", "MatchContractError", "MatchResult", "MatchStrength", "NO_MATCH", "OntologyError",
    "PLUG_IN", "Query", "RetrievalResult", "SIBLING", "STCError", "SUBSUME", "ServiceDescription",
    "ServiceValidationError", "StaleCodeError", "TaxonomyNode", "add_concept", "baseonto_encode",
    "build_query", "build_service", "classify", "compute_gcode", "converge", "discover", "feature_stratify",
    "g_subsumption", "load_ontology", "load_queries", "load_services", "subsumes", "validate_service",
]
