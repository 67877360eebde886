"""Description-logic reasoning toolkit for forensic event classification."""

from .model import KnowledgeBase
from .normalize import normalize_kb, validate_kb
from .ontology import builtin_ontology
from .reasoner import all_instances, explain, instance_of, is_consistent, is_subsumed, materialize
from .text import SourceDocument, parse_gold_labels, parse_kb, serialize_kb

__version__ = "0.1.0"

__all__ = [
    "KnowledgeBase",
    "SourceDocument",
    "all_instances",
    "builtin_ontology",
    "explain",
    "instance_of",
    "is_consistent",
    "is_subsumed",
    "materialize",
    "normalize_kb",
    "parse_gold_labels",
    "parse_kb",
    "serialize_kb",
    "validate_kb",
]
