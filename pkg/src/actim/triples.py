"""Entity-pair matching: turn decoded entity lists into knowledge triples.

Matching is document-wide and bidirectional. A head-role entity ("1") pairs
with tail-role ("2") or multi-role ("m") entities, a tail-role entity with
"1" or "m", and an "m" entity with anything. Two entities pair only when
their relation labels agree, except the "M" label which pairs with any
concrete label and borrows the partner's relation. Every candidate triple
must be one of the 18 admissible patterns; inadmissible candidates become
warnings, never silent drops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .ontology import OntologySchema, RelationType, builtin_schema
from .tagcodec import MULTI_RELATION, DecodedEntity

_HEAD_ROLES = frozenset({"1", "m"})
_TAIL_ROLES = frozenset({"2", "m"})


@dataclass(frozen=True)
class Triple:
    head: DecodedEntity
    relation: RelationType
    tail: DecodedEntity
    doc_id: str = ""

    def key(self) -> tuple[int, str, int]:
        return (self.head.position, self.relation.value, self.tail.position)


def _resolve_relation(head_label: str, tail_label: str) -> str | None:
    """Concrete relation of a candidate pair, or None when both are "M"."""
    if head_label == MULTI_RELATION and tail_label == MULTI_RELATION:
        return None
    if head_label == MULTI_RELATION:
        return tail_label
    return head_label


def match_triples(
    entities: list[DecodedEntity],
    schema: OntologySchema | None = None,
    doc_id: str = "",
) -> tuple[list[Triple], list[str]]:
    """Apply the matching rules to a decoded entity list.

    Pairs each candidate with every compatible partner in the document (not
    just the nearest), dedups, and reports skipped candidates as warnings.
    Total over any input; output order is deterministic.
    """
    schema = schema or builtin_schema()
    tails_by_label: dict[str, list[DecodedEntity]] = {}
    for e in entities:
        if e.role in _TAIL_ROLES:
            tails_by_label.setdefault(e.relation_label, []).append(e)

    triples: dict[tuple[int, str, int], Triple] = {}
    warnings: list[str] = []
    seen_warnings: set[str] = set()
    mm_pairs: dict[frozenset[int], int] = {}

    def warn(msg: str):
        if msg not in seen_warnings:
            seen_warnings.add(msg)
            warnings.append(msg)

    for head in entities:
        if head.role not in _HEAD_ROLES:
            continue
        if head.relation_label == MULTI_RELATION:
            partner_labels = sorted(tails_by_label)
        else:
            partner_labels = [head.relation_label, MULTI_RELATION]
        for label in partner_labels:
            for tail in tails_by_label.get(label, []):
                if tail is head:
                    continue
                relation = _resolve_relation(head.relation_label, tail.relation_label)
                if relation is None:
                    warn(
                        "skipped M-M pair with no concrete relation: "
                        f"{_pair_text(head, tail)}"
                    )
                    continue
                rel = RelationType(relation)
                if not schema.validate_triple(head.entity_class, rel, tail.entity_class):
                    warn(
                        f"pattern violation: ({head.entity_class.value}, {relation}, "
                        f"{tail.entity_class.value}) for {_pair_text(head, tail)}"
                    )
                    continue
                t = Triple(head, rel, tail, doc_id)
                triples[t.key()] = t
                if head.role == "m" and tail.role == "m":
                    pair = frozenset({head.position, tail.position})
                    mm_pairs[pair] = mm_pairs.get(pair, 0) + 1

    for pair, count in mm_pairs.items():
        if count > 1:
            a, b = sorted(pair)
            warn(f"m-m pair at positions {a} and {b} is admissible in both "
                 "orientations; emitting both")

    ordered = sorted(triples.values(), key=Triple.key)
    return ordered, warnings


def _pair_text(a: DecodedEntity, b: DecodedEntity) -> str:
    return f"{a.surface!r}@{a.position} / {b.surface!r}@{b.position}"


def brute_force_match(
    entities: list[DecodedEntity],
    schema: OntologySchema | None = None,
    doc_id: str = "",
) -> list[Triple]:
    """Ground-truth matcher: literal enumeration of all ordered pairs.

    Kept deliberately naive so it can serve as the oracle for match_triples.
    Limited to 12 entities.
    """
    if len(entities) > 12:
        raise ValueError(f"brute_force_match is limited to 12 entities, got {len(entities)}")
    schema = schema or builtin_schema()
    triples: dict[tuple[int, str, int], Triple] = {}
    for head in entities:
        for tail in entities:
            if head is tail:
                continue
            if head.role not in _HEAD_ROLES or tail.role not in _TAIL_ROLES:
                continue
            hl, tl = head.relation_label, tail.relation_label
            if hl == MULTI_RELATION and tl == MULTI_RELATION:
                continue
            if hl != MULTI_RELATION and tl != MULTI_RELATION and hl != tl:
                continue
            relation = tl if hl == MULTI_RELATION else hl
            rel = RelationType(relation)
            if not schema.validate_triple(head.entity_class, rel, tail.entity_class):
                continue
            t = Triple(head, rel, tail, doc_id)
            triples[t.key()] = t
    return sorted(triples.values(), key=Triple.key)


# ---------------------------------------------------------------------------
# JSON lines export (one object per triple)
# ---------------------------------------------------------------------------


def _entity_to_dict(e: DecodedEntity) -> dict:
    return {
        "surface": e.surface,
        "class": e.entity_class.value,
        "sentence": e.sentence_index,
        "start": e.token_start,
        "end": e.token_end,
        "position": e.position,
    }


def _entity_from_dict(d: dict) -> DecodedEntity:
    from .ontology import EntityClass

    return DecodedEntity(
        sentence_index=d["sentence"],
        token_start=d["start"],
        token_end=d["end"],
        position=d["position"],
        surface=d["surface"],
        entity_class=EntityClass(d["class"]),
        relation_label="M",
        role="m",
    )


def triple_to_dict(t: Triple) -> dict:
    return {
        "doc_id": t.doc_id,
        "relation": t.relation.value,
        "head": _entity_to_dict(t.head),
        "tail": _entity_to_dict(t.tail),
    }


def render_triples_jsonl(triples: list[Triple]) -> str:
    return "".join(json.dumps(triple_to_dict(t), ensure_ascii=False) + "\n" for t in triples)


def parse_triples_jsonl(text: str) -> list[Triple]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(
            Triple(
                head=_entity_from_dict(d["head"]),
                relation=RelationType(d["relation"]),
                tail=_entity_from_dict(d["tail"]),
                doc_id=d["doc_id"],
            )
        )
    return out
