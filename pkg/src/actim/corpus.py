"""Corpus ingestion: brat standoff parsing, sentence segmentation,
tokenization, corpus statistics and train/test partitioning.

Input documents are paired files: ``<doc>.txt`` (UTF-8 text) and ``<doc>.ann``
(brat standoff). Entity lines look like ``T1\\tComponent 11 22\\tCAN message``
and relation lines like ``R1\\ttargets Arg1:T1 Arg2:T2``.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from .errors import BratParseError, IntegrityError, PatternViolationError, SchemaViolationError
from .ontology import EntityClass, OntologySchema, RelationType, builtin_schema

_PUNCT = set(string.punctuation)

# Period-terminated words that do not end a sentence.
_ABBREVIATIONS = {
    "e.g.", "i.e.", "etc.", "cf.", "al.", "vs.", "ca.", "approx.",
    "inc.", "ltd.", "co.", "corp.", "dept.",
    "fig.", "figs.", "eq.", "eqs.", "no.", "nos.", "ver.", "rev.",
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
}


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int
    sentence_index: int


@dataclass(frozen=True)
class EntityAnnotation:
    id: str
    entity_class: EntityClass
    char_start: int
    char_end: int
    surface: str


@dataclass(frozen=True)
class RelationAnnotation:
    id: str
    relation: RelationType
    head_entity_id: str
    tail_entity_id: str


@dataclass
class AnnotatedDocument:
    doc_id: str
    text: str
    sentences: list[list[Token]]
    entities: list[EntityAnnotation] = field(default_factory=list)
    relations: list[RelationAnnotation] = field(default_factory=list)

    def all_tokens(self) -> list[Token]:
        return [t for sent in self.sentences for t in sent]

    def token_texts(self) -> list[list[str]]:
        return [[t.text for t in sent] for sent in self.sentences]

    def entity_by_id(self, entity_id: str) -> EntityAnnotation:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise IntegrityError(f"{self.doc_id}: unknown entity id {entity_id!r}")

    def entity_token_span(self, entity: EntityAnnotation) -> tuple[int, int, int]:
        """(sentence index, first token index, last token index) of an entity.

        The entity must start and end exactly on token boundaries inside a
        single sentence; anything else is an annotation defect.
        """
        for si, sent in enumerate(self.sentences):
            for ti, tok in enumerate(sent):
                if tok.char_start != entity.char_start:
                    continue
                for tj in range(ti, len(sent)):
                    if sent[tj].char_end == entity.char_end:
                        return si, ti, tj
                    if sent[tj].char_end > entity.char_end:
                        raise IntegrityError(
                            f"{self.doc_id}: entity {entity.id} [{entity.char_start},"
                            f"{entity.char_end}) ends inside a token"
                        )
                raise IntegrityError(
                    f"{self.doc_id}: entity {entity.id} crosses a sentence boundary"
                )
        raise IntegrityError(
            f"{self.doc_id}: entity {entity.id} [{entity.char_start},{entity.char_end})"
            " does not start on a token boundary"
        )


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    sentences: int
    entities: int
    relations: int
    per_class_entity_counts: dict[EntityClass, int]
    per_type_relation_counts: dict[RelationType, int]

    def to_dict(self) -> dict:
        return {
            "documents": self.documents,
            "sentences": self.sentences,
            "entities": self.entities,
            "relations": self.relations,
            "per_class_entity_counts": {
                c.value: self.per_class_entity_counts.get(c, 0) for c in EntityClass
            },
            "per_type_relation_counts": {
                r.value: self.per_type_relation_counts.get(r, 0) for r in RelationType
            },
        }


# ---------------------------------------------------------------------------
# Sentence segmentation and tokenization
# ---------------------------------------------------------------------------


def _word_before(text: str, idx: int) -> str:
    """Maximal non-whitespace run ending at idx (inclusive), left punct stripped."""
    j = idx
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    word = text[j : idx + 1]
    return word.lstrip("([{\"'")


def _is_abbreviation(text: str, period_idx: int) -> bool:
    word = _word_before(text, period_idx)
    if word.lower() in _ABBREVIATIONS:
        return True
    # single-letter initials: "J."
    return len(word) == 2 and word[0].isalpha()


def sentence_ranges(text: str) -> list[tuple[int, int]]:
    """Character ranges of sentences: split on .!? followed by whitespace/EOF,
    except periods ending a known abbreviation."""
    ranges = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in ".!?" and (i + 1 == n or text[i + 1].isspace()):
            if ch != "." or not _is_abbreviation(text, i):
                ranges.append((start, i + 1))
                j = i + 1
                while j < n and text[j].isspace():
                    j += 1
                start = i = j
                continue
        i += 1
    if start < n:
        ranges.append((start, n))
    return ranges


def _split_chunk(text: str, s: int, e: int, sent_idx: int) -> list[Token]:
    """Detach leading/trailing punctuation of a whitespace chunk as tokens."""
    lead = []
    while e - s > 1 and text[s] in _PUNCT:
        lead.append(Token(text[s], s, s + 1, sent_idx))
        s += 1
    trail = []
    while e - s > 1 and text[e - 1] in _PUNCT:
        trail.append(Token(text[e - 1], e - 1, e, sent_idx))
        e -= 1
    trail.reverse()
    return lead + [Token(text[s:e], s, e, sent_idx)] + trail


def tokenize(text: str) -> list[list[Token]]:
    """Deterministic rule-based segmentation: sentence ranges, whitespace
    split, punctuation detached at chunk edges."""
    sentences = []
    for rs, re_ in sentence_ranges(text):
        sent_idx = len(sentences)
        tokens: list[Token] = []
        i = rs
        while i < re_:
            if text[i].isspace():
                i += 1
                continue
            j = i
            while j < re_ and not text[j].isspace():
                j += 1
            tokens.extend(_split_chunk(text, i, j, sent_idx))
            i = j
        if tokens:
            sentences.append(tokens)
    return sentences


# ---------------------------------------------------------------------------
# Brat standoff parsing
# ---------------------------------------------------------------------------


def _normalize_name(name: str) -> str:
    return re.sub(r"[\s_-]", "", name).lower()


_CLASS_ALIASES = {_normalize_name(c.value): c for c in EntityClass}
_CLASS_ALIASES["asset"] = EntityClass.COMPONENT
_RELATION_ALIASES = {_normalize_name(r.value): r for r in RelationType}

_ENTITY_LINE = re.compile(r"^(T\d+)\t(\S+) (\d+) (\d+)\t(.*)$")
_RELATION_LINE = re.compile(r"^(R\d+)\t(\S+)((?: Arg[12]:T\d+){2})$")


def resolve_entity_class(name: str) -> EntityClass:
    key = _normalize_name(name)
    if key not in _CLASS_ALIASES:
        raise SchemaViolationError(f"unknown entity class name: {name!r}")
    return _CLASS_ALIASES[key]


def resolve_relation_type(name: str) -> RelationType:
    key = _normalize_name(name)
    if key not in _RELATION_ALIASES:
        raise SchemaViolationError(f"unknown relation type name: {name!r}")
    return _RELATION_ALIASES[key]


def parse_brat(
    text_content: str,
    ann_content: str,
    doc_id: str = "",
    schema: OntologySchema | None = None,
) -> AnnotatedDocument:
    """Parse a .txt/.ann pair into a validated document.

    Raises BratParseError (malformed line), SchemaViolationError (unknown
    type name), IntegrityError (surface/offset mismatch, token misalignment)
    or PatternViolationError (relation outside the 18 admissible patterns).
    """
    schema = schema or builtin_schema()
    sentences = tokenize(text_content)
    doc = AnnotatedDocument(doc_id=doc_id, text=text_content, sentences=sentences)

    entities: dict[str, EntityAnnotation] = {}
    relations: list[RelationAnnotation] = []
    for lineno, raw in enumerate(ann_content.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        kind = line[0]
        if kind == "T":
            m = _ENTITY_LINE.match(line)
            if m is None:
                fields = line.split("\t")
                if len(fields) >= 2 and ";" in fields[1]:
                    raise BratParseError("discontinuous entity spans are not supported", lineno)
                raise BratParseError(f"malformed entity line: {line!r}", lineno)
            eid, type_name, start, end, surface = m.groups()
            if eid in entities:
                raise BratParseError(f"duplicate entity id {eid}", lineno)
            entity = EntityAnnotation(
                id=eid,
                entity_class=resolve_entity_class(type_name),
                char_start=int(start),
                char_end=int(end),
                surface=surface,
            )
            if entity.char_start >= entity.char_end:
                raise BratParseError(f"empty span for {eid}", lineno)
            actual = text_content[entity.char_start : entity.char_end]
            if actual != entity.surface:
                raise IntegrityError(
                    f"{doc_id}: {eid} surface mismatch: annotation {entity.surface!r}"
                    f" vs text {actual!r}"
                )
            entities[eid] = entity
        elif kind == "R":
            m = _RELATION_LINE.match(line)
            if m is None:
                raise BratParseError(f"malformed relation line: {line!r}", lineno)
            rid, type_name, args = m.groups()
            arg_map = dict(a.split(":") for a in args.split())
            relations.append(
                RelationAnnotation(
                    id=rid,
                    relation=resolve_relation_type(type_name),
                    head_entity_id=arg_map["Arg1"],
                    tail_entity_id=arg_map["Arg2"],
                )
            )
        elif kind == "A" or kind == "N":
            continue  # attributes/normalizations carry no entity or relation content
        else:
            raise BratParseError(f"unsupported annotation line: {line!r}", lineno)

    doc.entities = sorted(entities.values(), key=lambda e: (e.char_start, e.char_end, e.id))
    for entity in doc.entities:
        doc.entity_token_span(entity)  # raises on misalignment

    for rel in relations:
        if rel.head_entity_id not in entities:
            raise IntegrityError(f"{doc_id}: {rel.id} references missing {rel.head_entity_id}")
        if rel.tail_entity_id not in entities:
            raise IntegrityError(f"{doc_id}: {rel.id} references missing {rel.tail_entity_id}")
        head = entities[rel.head_entity_id]
        tail = entities[rel.tail_entity_id]
        if not schema.validate_triple(head.entity_class, rel.relation, tail.entity_class):
            raise PatternViolationError(
                head.entity_class, rel.relation, tail.entity_class,
                context=f"{doc_id}:{rel.id}",
            )
    doc.relations = sorted(
        relations,
        key=lambda r: (
            entities[r.head_entity_id].char_start,
            entities[r.tail_entity_id].char_start,
            r.relation.value,
            r.id,
        ),
    )
    return doc


def to_brat(doc: AnnotatedDocument) -> tuple[str, str]:
    """Serialize back to a (.txt, .ann) pair with renumbered annotation ids."""
    id_map = {}
    lines = []
    for i, e in enumerate(doc.entities, start=1):
        id_map[e.id] = f"T{i}"
        lines.append(f"T{i}\t{e.entity_class.value} {e.char_start} {e.char_end}\t{e.surface}")
    for j, r in enumerate(doc.relations, start=1):
        lines.append(
            f"R{j}\t{r.relation.value} Arg1:{id_map[r.head_entity_id]}"
            f" Arg2:{id_map[r.tail_entity_id]}"
        )
    ann = "\n".join(lines)
    if ann:
        ann += "\n"
    return doc.text, ann


# ---------------------------------------------------------------------------
# JSON document dump (stable key order)
# ---------------------------------------------------------------------------


def document_to_dict(doc: AnnotatedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "sentences": [
            [{"text": t.text, "start": t.char_start, "end": t.char_end} for t in sent]
            for sent in doc.sentences
        ],
        "entities": [
            {
                "id": e.id,
                "class": e.entity_class.value,
                "start": e.char_start,
                "end": e.char_end,
                "surface": e.surface,
            }
            for e in doc.entities
        ],
        "relations": [
            {
                "id": r.id,
                "type": r.relation.value,
                "head": r.head_entity_id,
                "tail": r.tail_entity_id,
            }
            for r in doc.relations
        ],
    }


def document_from_dict(data: dict) -> AnnotatedDocument:
    sentences = [
        [Token(t["text"], t["start"], t["end"], si) for t in sent]
        for si, sent in enumerate(data["sentences"])
    ]
    entities = [
        EntityAnnotation(e["id"], EntityClass(e["class"]), e["start"], e["end"], e["surface"])
        for e in data["entities"]
    ]
    relations = [
        RelationAnnotation(r["id"], RelationType(r["type"]), r["head"], r["tail"])
        for r in data["relations"]
    ]
    return AnnotatedDocument(data["doc_id"], data["text"], sentences, entities, relations)


def document_to_json(doc: AnnotatedDocument) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2) + "\n"


def document_from_json(text: str) -> AnnotatedDocument:
    return document_from_dict(json.loads(text))


def read_corpus_dir(path: str | Path, schema: OntologySchema | None = None) -> list[AnnotatedDocument]:
    """Parse every .txt/.ann pair under a directory, sorted by doc id."""
    root = Path(path)
    docs = []
    txt_files = sorted(root.glob("*.txt"))
    if not txt_files:
        raise IntegrityError(f"no .txt files found under {root}")
    for txt in txt_files:
        ann = txt.with_suffix(".ann")
        if not ann.exists():
            raise IntegrityError(f"missing annotation file for {txt.name}")
        docs.append(
            parse_brat(
                txt.read_text(encoding="utf-8"),
                ann.read_text(encoding="utf-8"),
                doc_id=txt.stem,
                schema=schema,
            )
        )
    return docs


# ---------------------------------------------------------------------------
# Statistics and partitioning
# ---------------------------------------------------------------------------


def corpus_stats(documents: list[AnnotatedDocument]) -> CorpusStats:
    per_class: dict[EntityClass, int] = {}
    per_type: dict[RelationType, int] = {}
    sentences = entities = relations = 0
    for doc in documents:
        sentences += len(doc.sentences)
        entities += len(doc.entities)
        relations += len(doc.relations)
        for e in doc.entities:
            per_class[e.entity_class] = per_class.get(e.entity_class, 0) + 1
        for r in doc.relations:
            per_type[r.relation] = per_type.get(r.relation, 0) + 1
    return CorpusStats(len(documents), sentences, entities, relations, per_class, per_type)


def _shuffled_by_id(documents: list[AnnotatedDocument], seed: int) -> list[AnnotatedDocument]:
    ordered = sorted(documents, key=lambda d: d.doc_id)
    Random(seed).shuffle(ordered)
    return ordered


def split_train_test(
    documents: list[AnnotatedDocument], ratio: float, seed: int
) -> tuple[list[AnnotatedDocument], list[AnnotatedDocument]]:
    """Document-level split with |train| = round(ratio * N), reproducible."""
    if not documents:
        raise ValueError("cannot split an empty corpus")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    ordered = _shuffled_by_id(documents, seed)
    n_train = int(ratio * len(ordered) + 0.5)
    return ordered[:n_train], ordered[n_train:]


def kfold(
    documents: list[AnnotatedDocument], k: int, seed: int
) -> list[tuple[list[AnnotatedDocument], list[AnnotatedDocument]]]:
    """k document-level folds; every document validates exactly once and
    fold sizes differ by at most one."""
    if k < 2 or k > len(documents):
        raise ValueError(f"k must be in [2, {len(documents)}], got {k}")
    ordered = _shuffled_by_id(documents, seed)
    n, rem = divmod(len(ordered), k)
    folds = []
    pos = 0
    for i in range(k):
        size = n + (1 if i < rem else 0)
        val = ordered[pos : pos + size]
        train = ordered[:pos] + ordered[pos + size :]
        folds.append((train, val))
        pos += size
    return folds
