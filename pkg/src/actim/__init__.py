"""Automotive cyber-threat-intelligence toolkit.

Parses brat-annotated CTI documents, encodes them in a joint
boundary/class/relation/role tag scheme, trains a document-level sequence
tagger, matches decoded entities into ontology-validated triples and builds
an exportable knowledge graph with strict-match evaluation.
"""

from .ontology import (
    EntityClass,
    OntologySchema,
    RelationType,
    TriplePattern,
    builtin_schema,
    class_by_abbrev,
    validate_triple,
)
from .corpus import (
    AnnotatedDocument,
    CorpusStats,
    EntityAnnotation,
    RelationAnnotation,
    Token,
    corpus_stats,
    kfold,
    parse_brat,
    split_train_test,
    to_brat,
)
from .tagcodec import (
    JointTag,
    TAG_ALPHABET,
    TAG_ALPHABET_SIZE,
    TagSequence,
    DecodedEntity,
    decode_entities,
    encode,
    parse_tag,
    render_tag,
)
from .triples import Triple, brute_force_match, match_triples
from .kg import KnowledgeGraph, build_graph, export, import_json
from .evaluation import EvalReport, cross_validate, evaluate_corpus, evaluate_strict

__version__ = "0.1.0"
