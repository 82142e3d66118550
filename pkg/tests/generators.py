"""Random fixture generators shared by the unit and acceptance tests."""

import random

from actim.corpus import AnnotatedDocument, EntityAnnotation, RelationAnnotation, Token
from actim.ontology import builtin_schema
from actim.tagcodec import DecodedEntity, MULTI_RELATION, MULTI_ROLE

_FILLER = [
    "the", "attacker", "probes", "via", "bus", "module", "remote", "signal",
    "weak", "firmware", "reads", "gains", "then", "data", "crafted", "frames",
]

SCHEMA = builtin_schema()
PATTERNS = sorted(
    SCHEMA.patterns, key=lambda p: (p.relation.value, p.head_class.value, p.tail_class.value)
)


def expected_entity_label(slots):
    """Independent re-derivation of the (relation label, role) assignment an
    entity should carry, given its (relation type, role) slots."""
    if not slots:
        return None
    if len(slots) == 1:
        return slots[0]
    types = {s[0] for s in slots}
    return (types.pop() if len(types) == 1 else MULTI_RELATION), MULTI_ROLE


def random_document(rng: random.Random, doc_id: str) -> AnnotatedDocument:
    """A random annotated document whose relations all follow the admissible
    patterns and whose entities all participate in at least one relation."""
    n_rel = rng.randint(1, 4)
    entities = []  # (entity_index, class, n_tokens)
    relations = []  # (relation type, head_index, tail_index)
    by_class = {}
    for _ in range(n_rel):
        p = rng.choice(PATTERNS)
        pair = []
        for cls in (p.head_class, p.relation), (p.tail_class, None):
            cls = cls[0]
            pool = by_class.get(cls, [])
            if pool and rng.random() < 0.35:
                idx = rng.choice(pool)
            else:
                idx = len(entities)
                entities.append((idx, cls, rng.randint(1, 3)))
                by_class.setdefault(cls, []).append(idx)
            pair.append(idx)
        if pair[0] == pair[1]:
            continue  # self-relation never arises from distinct draws except reuse
        relations.append((p.relation, pair[0], pair[1]))
    if not relations:
        p = PATTERNS[0]
        entities = [(0, p.head_class, 1), (1, p.tail_class, 1)]
        relations = [(p.relation, 0, 1)]
        by_class = {}

    # distribute entities over sentences in order
    n_sent = rng.randint(1, min(3, len(entities)))
    assignment = sorted(rng.randint(0, n_sent - 1) for _ in entities)
    sentences_plan = [[] for _ in range(n_sent)]
    for (idx, cls, width), sent in zip(entities, assignment):
        sentences_plan[sent].append((idx, cls, width))

    text_parts = []
    offset = 0
    sentences = []
    ann_entities = {}
    for si, plan in enumerate(sentences_plan):
        tokens = []

        def add_token(word):
            nonlocal offset
            if text_parts:
                offset += 1  # joining space
            start = offset
            text_parts.append(word)
            offset += len(word)
            tokens.append(Token(word, start, offset, si))

        for n in range(rng.randint(0, 2)):
            add_token(rng.choice(_FILLER))
        for idx, cls, width in plan:
            first = len(tokens)
            for w in range(width):
                add_token(f"e{idx}w{w}")
            ann_entities[idx] = (cls, tokens[first].char_start, tokens[-1].char_end)
            for n in range(rng.randint(0, 2)):
                add_token(rng.choice(_FILLER))
        if not tokens:
            add_token(rng.choice(_FILLER))
        sentences.append(tokens)

    text = " ".join(text_parts)
    doc = AnnotatedDocument(doc_id=doc_id, text=text, sentences=sentences)
    doc.entities = [
        EntityAnnotation(
            id=f"T{idx + 1}",
            entity_class=cls,
            char_start=start,
            char_end=end,
            surface=text[start:end],
        )
        for idx, (cls, start, end) in sorted(ann_entities.items())
    ]
    doc.relations = [
        RelationAnnotation(f"R{j + 1}", rel, f"T{h + 1}", f"T{t + 1}")
        for j, (rel, h, t) in enumerate(relations)
    ]
    return doc


ROLE_CHOICES = ("1", "2", "m")
LABEL_CHOICES = tuple(r.value for r in SCHEMA.relations) + (MULTI_RELATION,)
CLASS_CHOICES = tuple(SCHEMA.classes)


def random_decoded_entities(rng: random.Random, max_entities: int = 12):
    """Random decoded-entity lists for exercising the triple matcher."""
    n = rng.randint(0, max_entities)
    out = []
    pos = 0
    for i in range(n):
        width = rng.randint(1, 2)
        out.append(
            DecodedEntity(
                sentence_index=0,
                token_start=pos,
                token_end=pos + width - 1,
                position=pos,
                surface=f"entity{i}",
                entity_class=rng.choice(CLASS_CHOICES),
                relation_label=rng.choice(LABEL_CHOICES),
                role=rng.choice(ROLE_CHOICES),
            )
        )
        pos += width
    return out
