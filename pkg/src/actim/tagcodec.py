"""Joint tag codec.

Each token carries one composite label encoding four things at once:
boundary (BIOES), entity class, relation type and entity role, rendered as
``<boundary>-<class abbrev>-<relation>-<role>`` (or bare ``O``). Example:
``S-AP-targets-1 B-Com-targets-2 E-Com-targets-2 O`` for the four tokens of
"Monitoring CAN message .".

Relation field is one of the 10 relation ids or the literal ``M`` (entity
participates in relations of differing types). Role is ``1`` (head), ``2``
(tail) or ``m`` (entity holds more than one relation slot).

The full alphabet is enumerable: 4 boundaries x 10 classes x 11 relation
labels x 3 roles + 1 (O) = 1321 distinct tags. The enumeration order defined
here is the canonical classifier output order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import AnnotatedDocument
from .errors import EncodeError, IntegrityError, TagParseError
from .ontology import EntityClass, OntologySchema, RelationType, builtin_schema

BOUNDARIES = ("B", "I", "E", "S")
RELATION_LABELS = tuple(r.value for r in RelationType) + ("M",)
ROLE_LABELS = ("1", "2", "m")

MULTI_RELATION = "M"
MULTI_ROLE = "m"


@dataclass(frozen=True)
class JointTag:
    boundary: str
    entity_abbrev: str | None = None
    relation: str | None = None
    role: str | None = None

    def __post_init__(self):
        if self.boundary == "O":
            if not (self.entity_abbrev is None and self.relation is None and self.role is None):
                raise TagParseError("O tag carries no fields")
        else:
            if self.boundary not in BOUNDARIES:
                raise TagParseError(f"unknown boundary label {self.boundary!r}")
            if self.entity_abbrev is None or self.relation is None or self.role is None:
                raise TagParseError(f"{self.boundary} tag requires all fields")

    @property
    def is_outside(self) -> bool:
        return self.boundary == "O"


O_TAG = JointTag("O")

_ABBREVS = tuple(c.tag_abbrev for c in EntityClass)
_ABBREV_SET = frozenset(_ABBREVS)
_RELATION_SET = frozenset(RELATION_LABELS)
_ROLE_SET = frozenset(ROLE_LABELS)


def render_tag(tag: JointTag) -> str:
    if tag.is_outside:
        return "O"
    return f"{tag.boundary}-{tag.entity_abbrev}-{tag.relation}-{tag.role}"


def parse_tag(text: str) -> JointTag:
    """Inverse of render_tag. Relation ids may contain '-', so the string is
    split at its first, second and last separator."""
    if text == "O":
        return O_TAG
    first = text.find("-")
    second = text.find("-", first + 1)
    last = text.rfind("-")
    if first < 0 or second < 0 or last <= second:
        raise TagParseError(f"malformed tag: {text!r}")
    boundary = text[:first]
    abbrev = text[first + 1 : second]
    relation = text[second + 1 : last]
    role = text[last + 1 :]
    if boundary not in BOUNDARIES:
        raise TagParseError(f"unknown boundary in tag {text!r}")
    if abbrev not in _ABBREV_SET:
        raise TagParseError(f"unknown entity abbreviation in tag {text!r}")
    if relation not in _RELATION_SET:
        raise TagParseError(f"unknown relation label in tag {text!r}")
    if role not in _ROLE_SET:
        raise TagParseError(f"unknown role label in tag {text!r}")
    return JointTag(boundary, abbrev, relation, role)


def _build_alphabet() -> tuple[JointTag, ...]:
    tags = [O_TAG]
    for boundary in BOUNDARIES:
        for abbrev in _ABBREVS:
            for relation in RELATION_LABELS:
                for role in ROLE_LABELS:
                    tags.append(JointTag(boundary, abbrev, relation, role))
    return tuple(tags)


TAG_ALPHABET: tuple[JointTag, ...] = _build_alphabet()
TAG_TO_INDEX: dict[JointTag, int] = {t: i for i, t in enumerate(TAG_ALPHABET)}
TAG_ALPHABET_SIZE = len(TAG_ALPHABET)
assert TAG_ALPHABET_SIZE == 1321


@dataclass
class TagSequence:
    """Per-token joint tags aligned to a document's tokens, with sentence
    boundaries retained."""

    doc_id: str
    tokens: list[list[str]]
    tags: list[list[JointTag]] = field(default_factory=list)

    def __post_init__(self):
        if self.tags and [len(s) for s in self.tags] != [len(s) for s in self.tokens]:
            raise IntegrityError(f"{self.doc_id}: tag/token shape mismatch")

    def flat_tokens(self) -> list[str]:
        return [t for sent in self.tokens for t in sent]

    def flat_tags(self) -> list[JointTag]:
        return [t for sent in self.tags for t in sent]

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.tokens)


@dataclass(frozen=True)
class DecodedEntity:
    """An entity span recovered from a tag sequence.

    position is the index of the first token in document order; the in-
    sentence token range is [token_start, token_end] inclusive.
    """

    sentence_index: int
    token_start: int
    token_end: int
    position: int
    surface: str
    entity_class: EntityClass
    relation_label: str
    role: str

    @property
    def span(self) -> tuple[int, int, int]:
        return (self.sentence_index, self.token_start, self.token_end)


def _entity_slots(doc: AnnotatedDocument) -> dict[str, list[tuple[str, str]]]:
    slots: dict[str, list[tuple[str, str]]] = {e.id: [] for e in doc.entities}
    for rel in doc.relations:
        slots[rel.head_entity_id].append((rel.relation.value, "1"))
        slots[rel.tail_entity_id].append((rel.relation.value, "2"))
    return slots


def entity_label(slots: list[tuple[str, str]]) -> tuple[str, str] | None:
    """(relation label, role) for an entity given its relation slots.

    One slot keeps its concrete type and role. Several slots of one type keep
    the type; mixed types become "M". Any entity holding more than one slot
    gets role "m". Entities with no slot are not representable and map to O.
    """
    if not slots:
        return None
    if len(slots) == 1:
        return slots[0]
    types = {s[0] for s in slots}
    relation = types.pop() if len(types) == 1 else MULTI_RELATION
    return relation, MULTI_ROLE


def encode(doc: AnnotatedDocument, schema: OntologySchema | None = None) -> TagSequence:
    """Encode an annotated document into per-token joint tags.

    Entity spans must align with token boundaries and must not overlap (one
    tag per token); violations raise EncodeError. Entities that participate
    in no relation have no representation in this scheme and stay O.
    """
    tags: list[list[JointTag]] = [[O_TAG] * len(sent) for sent in doc.sentences]
    slots = _entity_slots(doc)
    for entity in doc.entities:
        label = entity_label(slots[entity.id])
        if label is None:
            continue
        relation, role = label
        try:
            si, ti, tj = doc.entity_token_span(entity)
        except IntegrityError as err:
            raise EncodeError(str(err)) from None
        for t in range(ti, tj + 1):
            if not tags[si][t].is_outside:
                raise EncodeError(
                    f"{doc.doc_id}: overlapping entity spans at sentence {si} token {t}"
                )
        abbrev = entity.entity_class.tag_abbrev
        if ti == tj:
            tags[si][ti] = JointTag("S", abbrev, relation, role)
        else:
            tags[si][ti] = JointTag("B", abbrev, relation, role)
            for t in range(ti + 1, tj):
                tags[si][t] = JointTag("I", abbrev, relation, role)
            tags[si][tj] = JointTag("E", abbrev, relation, role)
    return TagSequence(doc.doc_id, doc.token_texts(), tags)


def decode_entities(
    seq: TagSequence, schema: OntologySchema | None = None
) -> list[DecodedEntity]:
    """Segment a (possibly noisy) tag sequence into typed entity spans.

    Total over arbitrary sequences from the tag alphabet. Boundary repair: I
    or E with no open run starts a new entity at that token (a lone E closes
    immediately); an unclosed run ends at the last contiguous non-O token.
    When tokens inside a run disagree, the first token's fields win.
    """
    schema = schema or builtin_schema()
    out: list[DecodedEntity] = []
    offset = 0
    for si, (toks, tags) in enumerate(zip(seq.tokens, seq.tags)):

        def close(s: int, e: int, si=si, toks=toks, tags=tags, offset=offset):
            head = tags[s]
            out.append(
                DecodedEntity(
                    sentence_index=si,
                    token_start=s,
                    token_end=e,
                    position=offset + s,
                    surface=" ".join(toks[s : e + 1]),
                    entity_class=schema.class_by_abbrev(head.entity_abbrev),
                    relation_label=head.relation,
                    role=head.role,
                )
            )

        start: int | None = None
        for i, tag in enumerate(tags):
            b = tag.boundary
            if b == "O":
                if start is not None:
                    close(start, i - 1)
                    start = None
            elif b == "S":
                if start is not None:
                    close(start, i - 1)
                    start = None
                close(i, i)
            elif b == "B":
                if start is not None:
                    close(start, i - 1)
                start = i
            elif b == "I":
                if start is None:
                    start = i
            else:  # E
                if start is None:
                    close(i, i)
                else:
                    close(start, i)
                    start = None
        if start is not None:
            close(start, len(tags) - 1)
        offset += len(toks)
    return out


# ---------------------------------------------------------------------------
# Joint-tag file format: one token per line "<token>\t<tag>", blank line
# between sentences, "-DOCSTART- <doc_id>" line opening each document.
# This is the training input format; rendering is bit-exact.
# ---------------------------------------------------------------------------


def render_tag_file(sequences: list[TagSequence]) -> str:
    parts = []
    for seq in sequences:
        block = f"-DOCSTART- {seq.doc_id}\n"
        for toks, tags in zip(seq.tokens, seq.tags):
            block += "\n"
            for tok, tag in zip(toks, tags):
                block += f"{tok}\t{render_tag(tag)}\n"
        parts.append(block)
    return "\n".join(parts)


def parse_tag_file(text: str) -> list[TagSequence]:
    sequences: list[TagSequence] = []
    doc_id: str | None = None
    tokens: list[list[str]] = []
    tags: list[list[JointTag]] = []
    sent_toks: list[str] = []
    sent_tags: list[JointTag] = []

    def flush_sentence():
        nonlocal sent_toks, sent_tags
        if sent_toks:
            tokens.append(sent_toks)
            tags.append(sent_tags)
            sent_toks, sent_tags = [], []

    def flush_document():
        nonlocal tokens, tags
        flush_sentence()
        if doc_id is not None:
            sequences.append(TagSequence(doc_id, tokens, tags))
        tokens, tags = [], []

    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("-DOCSTART-"):
            flush_document()
            doc_id = line[len("-DOCSTART-") :].strip()
        elif not line.strip():
            flush_sentence()
        else:
            if "\t" not in line:
                raise TagParseError(f"line {lineno}: expected '<token>\\t<tag>', got {line!r}")
            if doc_id is None:
                raise TagParseError(f"line {lineno}: token line before any -DOCSTART-")
            tok, _, tag_text = line.partition("\t")
            sent_toks.append(tok)
            sent_tags.append(parse_tag(tag_text))
    flush_document()
    return sequences
