"""Strict-match scoring.

An extracted unit counts as a true positive only when its boundary span,
entity class and relation label all equal a gold unit's (each gold unit is
consumed at most once; exact-match greedy pairing in document order). Entity
role is not part of the entity-level criterion; it is exercised indirectly by
the triple-level scores. Zero denominators report precision/recall 0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import AlignmentError
from .ontology import EntityClass, OntologySchema, RelationType, builtin_schema
from .tagcodec import TagSequence, decode_entities
from .triples import match_triples


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "support": self.support,
        }


def _scores(tp: int, fp: int, fn: int) -> Scores:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return Scores(p, r, f1, tp, fp, fn)


@dataclass
class EvalReport:
    overall: Scores
    counts: tuple[int, int, int]
    per_entity_class: dict[EntityClass, Scores]
    per_relation_type: dict[RelationType, Scores]
    relation_overall: Scores
    relation_counts: tuple[int, int, int]

    def to_dict(self) -> dict:
        return {
            "version": "actim-report v1",
            "entity": {
                "overall": self.overall.to_dict(),
                "per_class": {
                    c.value: self.per_entity_class[c].to_dict()
                    for c in EntityClass
                    if c in self.per_entity_class
                },
            },
            "relation": {
                "overall": self.relation_overall.to_dict(),
                "per_type": {
                    r.value: self.per_relation_type[r].to_dict()
                    for r in RelationType
                    if r in self.per_relation_type
                },
            },
        }


def _entity_units(seq: TagSequence, schema: OntologySchema) -> Counter:
    return Counter(
        (e.sentence_index, e.token_start, e.token_end, e.entity_class, e.relation_label)
        for e in decode_entities(seq, schema)
    )


def _triple_units(seq: TagSequence, schema: OntologySchema) -> Counter:
    entities = decode_entities(seq, schema)
    triples, _ = match_triples(entities, schema, doc_id=seq.doc_id)
    return Counter(
        (
            (t.head.span, t.head.entity_class),
            t.relation,
            (t.tail.span, t.tail.entity_class),
        )
        for t in triples
    )


def _confusion(gold: Counter, pred: Counter) -> tuple[int, int, int]:
    tp = sum((gold & pred).values())
    fp = sum(pred.values()) - tp
    fn = sum(gold.values()) - tp
    return tp, fp, fn


def _group_counts(gold: Counter, pred: Counter, group_of) -> dict:
    groups = {group_of(u) for u in gold} | {group_of(u) for u in pred}
    out = {}
    for g in groups:
        gold_g = Counter({u: c for u, c in gold.items() if group_of(u) == g})
        pred_g = Counter({u: c for u, c in pred.items() if group_of(u) == g})
        out[g] = _confusion(gold_g, pred_g)
    return out


def _check_alignment(gold: TagSequence, predicted: TagSequence):
    if gold.tokens != predicted.tokens:
        raise AlignmentError(
            f"{gold.doc_id}: gold and predicted sequences are not aligned to the"
            " same token stream"
        )


def _build_report(pairs: list[tuple[TagSequence, TagSequence]], schema: OntologySchema) -> EvalReport:
    ent_counts = [0, 0, 0]
    rel_counts = [0, 0, 0]
    per_class: dict[EntityClass, list[int]] = {}
    per_type: dict[RelationType, list[int]] = {}
    for gold, pred in pairs:
        _check_alignment(gold, pred)
        g_ent = _entity_units(gold, schema)
        p_ent = _entity_units(pred, schema)
        for i, v in enumerate(_confusion(g_ent, p_ent)):
            ent_counts[i] += v
        for cls, counts in _group_counts(g_ent, p_ent, lambda u: u[3]).items():
            acc = per_class.setdefault(cls, [0, 0, 0])
            for i, v in enumerate(counts):
                acc[i] += v
        g_tri = _triple_units(gold, schema)
        p_tri = _triple_units(pred, schema)
        for i, v in enumerate(_confusion(g_tri, p_tri)):
            rel_counts[i] += v
        for rel, counts in _group_counts(g_tri, p_tri, lambda u: u[1]).items():
            acc = per_type.setdefault(rel, [0, 0, 0])
            for i, v in enumerate(counts):
                acc[i] += v
    return EvalReport(
        overall=_scores(*ent_counts),
        counts=tuple(ent_counts),
        per_entity_class={c: _scores(*v) for c, v in per_class.items()},
        per_relation_type={r: _scores(*v) for r, v in per_type.items()},
        relation_overall=_scores(*rel_counts),
        relation_counts=tuple(rel_counts),
    )


def evaluate_strict(
    gold: TagSequence, predicted: TagSequence, schema: OntologySchema | None = None
) -> EvalReport:
    """Strict entity-level and triple-level scores for one document pair."""
    return _build_report([(gold, predicted)], schema or builtin_schema())


def evaluate_corpus(
    pairs: list[tuple[TagSequence, TagSequence]], schema: OntologySchema | None = None
) -> EvalReport:
    """Micro-aggregated strict scores over (gold, predicted) document pairs."""
    return _build_report(pairs, schema or builtin_schema())


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass
class CrossValidationResult:
    fold_reports: list[EvalReport]
    mean_entity: tuple[float, float, float] = field(init=False)
    mean_relation: tuple[float, float, float] = field(init=False)

    def __post_init__(self):
        n = len(self.fold_reports)
        self.mean_entity = tuple(
            sum(getattr(r.overall, k) for r in self.fold_reports) / n
            for k in ("precision", "recall", "f1")
        )
        self.mean_relation = tuple(
            sum(getattr(r.relation_overall, k) for r in self.fold_reports) / n
            for k in ("precision", "recall", "f1")
        )

    def to_dict(self) -> dict:
        return {
            "folds": [r.to_dict() for r in self.fold_reports],
            "mean_entity": {
                "precision": self.mean_entity[0],
                "recall": self.mean_entity[1],
                "f1": self.mean_entity[2],
            },
            "mean_relation": {
                "precision": self.mean_relation[0],
                "recall": self.mean_relation[1],
                "f1": self.mean_relation[2],
            },
        }


def cross_validate(
    documents,
    k: int,
    config,
    provider,
    schema: OntologySchema | None = None,
) -> CrossValidationResult:
    """Train k models on k-fold partitions and average the held-out scores."""
    from .corpus import kfold
    from .model import predict, train
    from .tagcodec import encode

    schema = schema or builtin_schema()
    reports = []
    for train_docs, val_docs in kfold(documents, k, config.seed):
        gold_train = [encode(d, schema) for d in train_docs]
        params, _ = train(gold_train, provider, config)
        pairs = []
        for doc in val_docs:
            gold = encode(doc, schema)
            pred = predict(doc.token_texts(), provider, params, config, doc_id=doc.doc_id)
            pairs.append((gold, pred))
        reports.append(evaluate_corpus(pairs, schema))
    return CrossValidationResult(reports)
