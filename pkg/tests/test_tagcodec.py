import random

import pytest

from actim.errors import EncodeError, TagParseError
from actim.ontology import EntityClass, builtin_schema
from actim.tagcodec import (
    JointTag,
    O_TAG,
    TAG_ALPHABET,
    TAG_ALPHABET_SIZE,
    TAG_TO_INDEX,
    TagSequence,
    decode_entities,
    encode,
    parse_tag,
    parse_tag_file,
    render_tag,
    render_tag_file,
)
from generators import expected_entity_label, random_document

SCHEMA = builtin_schema()


class TestTagText:
    def test_running_example_renders(self):
        tag = JointTag("S", "AP", "targets", "1")
        assert render_tag(tag) == "S-AP-targets-1"
        assert parse_tag("S-AP-targets-1") == tag

    def test_outside_tag(self):
        assert render_tag(O_TAG) == "O"
        assert parse_tag("O") is O_TAG

    def test_multi_relation_tag(self):
        tag = parse_tag("B-Com-M-m")
        assert (tag.boundary, tag.entity_abbrev, tag.relation, tag.role) == ("B", "Com", "M", "m")

    def test_hyphenated_relation_ids(self):
        for rel in ("related-to", "located-at", "based-on", "consists-of"):
            text = f"I-Veh-{rel}-2"
            tag = parse_tag(text)
            assert tag.relation == rel
            assert render_tag(tag) == text

    @pytest.mark.parametrize(
        "bad",
        ["", "B", "B-AP", "B-AP-targets", "X-AP-targets-1", "B-ZZ-targets-1",
         "B-AP-flies-1", "B-AP-targets-9", "o", "O-AP-targets-1"],
    )
    def test_malformed_rejected(self, bad):
        with pytest.raises(TagParseError):
            parse_tag(bad)

    def test_o_tag_with_fields_rejected(self):
        with pytest.raises(TagParseError):
            JointTag("O", "AP", "targets", "1")

    def test_non_o_requires_all_fields(self):
        with pytest.raises(TagParseError):
            JointTag("B", "AP", None, "1")


class TestAlphabet:
    def test_size_is_1321(self):
        # 4 boundaries x 10 classes x 11 relation labels x 3 roles + O
        assert TAG_ALPHABET_SIZE == 4 * 10 * 11 * 3 + 1 == 1321

    def test_parse_render_bijective_over_alphabet(self):
        seen = set()
        for i, tag in enumerate(TAG_ALPHABET):
            text = render_tag(tag)
            assert text not in seen
            seen.add(text)
            assert parse_tag(text) == tag
            assert TAG_TO_INDEX[tag] == i

    def test_o_is_index_zero(self):
        assert TAG_ALPHABET[0] is O_TAG


class TestEncode:
    def test_running_example_byte_exact(self, example_doc):
        seq = encode(example_doc)
        rendered = " ".join(render_tag(t) for sent in seq.tags for t in sent)
        assert rendered == "S-AP-targets-1 B-Com-targets-2 E-Com-targets-2 O"

    def test_sentence_without_entities_is_all_o(self):
        doc = random_document(random.Random(0), "x")
        doc.entities = []
        doc.relations = []
        seq = encode(doc)
        assert all(t is O_TAG for sent in seq.tags for t in sent)

    def test_mixed_relation_types_get_M_and_m(self, toy_docs):
        seq = encode(toy_docs[3])  # d4 holds the two multi-relation entities
        rendered = [render_tag(t) for sent in seq.tags for t in sent]
        assert "S-AP-M-m" in rendered
        assert "S-Com-M-m" in rendered

    def test_same_type_twice_keeps_type_with_role_m(self):
        rng = random.Random(1)
        from actim.corpus import RelationAnnotation
        from actim.ontology import RelationType

        doc = random_document(rng, "x")
        # force: first entity heads two same-type relations to two targets
        doc = _two_targets_doc()
        seq = encode(doc)
        first = seq.tags[0][0]
        assert first.relation == "targets"
        assert first.role == "m"

    def test_overlapping_spans_rejected(self, example_doc):
        from actim.corpus import EntityAnnotation

        example_doc.entities.append(
            EntityAnnotation("T9", EntityClass.TOOL, 11, 14, "CAN")
        )
        example_doc.relations.append(
            type(example_doc.relations[0])("R9", example_doc.relations[0].relation, "T1", "T9")
        )
        with pytest.raises(EncodeError, match="overlap"):
            encode(example_doc)

    def test_tag_token_shape_mismatch_rejected(self):
        with pytest.raises(Exception):
            TagSequence("x", [["a", "b"]], [[O_TAG]])


def _two_targets_doc():
    from actim.corpus import AnnotatedDocument, EntityAnnotation, RelationAnnotation, Token
    from actim.ontology import RelationType

    words = ["replay", "gateway", "airbag"]
    tokens = []
    off = 0
    for w in words:
        tokens.append(Token(w, off, off + len(w), 0))
        off += len(w) + 1
    text = " ".join(words)
    doc = AnnotatedDocument("two", text, [tokens])
    doc.entities = [
        EntityAnnotation("T1", EntityClass.ATTACK_PATTERN, tokens[0].char_start, tokens[0].char_end, "replay"),
        EntityAnnotation("T2", EntityClass.COMPONENT, tokens[1].char_start, tokens[1].char_end, "gateway"),
        EntityAnnotation("T3", EntityClass.COMPONENT, tokens[2].char_start, tokens[2].char_end, "airbag"),
    ]
    doc.relations = [
        RelationAnnotation("R1", RelationType.TARGETS, "T1", "T2"),
        RelationAnnotation("R2", RelationType.TARGETS, "T1", "T3"),
    ]
    return doc


class TestDecode:
    def test_running_example(self, example_doc):
        seq = encode(example_doc)
        out = decode_entities(seq, SCHEMA)
        assert [(e.surface, e.entity_class, e.relation_label, e.role) for e in out] == [
            ("Monitoring", EntityClass.ATTACK_PATTERN, "targets", "1"),
            ("CAN message", EntityClass.COMPONENT, "targets", "2"),
        ]

    def test_all_o_decodes_empty(self):
        seq = TagSequence("x", [["a", "b", "c"]], [[O_TAG, O_TAG, O_TAG]])
        assert decode_entities(seq, SCHEMA) == []

    def test_first_token_fields_win(self):
        tags = [parse_tag("B-AP-targets-1"), parse_tag("I-Vul-uses-2"), parse_tag("E-AP-targets-1")]
        seq = TagSequence("x", [["a", "b", "c"]], [tags])
        out = decode_entities(seq, SCHEMA)
        assert len(out) == 1
        e = out[0]
        assert e.entity_class is EntityClass.ATTACK_PATTERN
        assert e.relation_label == "targets"
        assert e.role == "1"
        assert (e.token_start, e.token_end) == (0, 2)

    def test_orphan_i_starts_entity(self):
        tags = [O_TAG, parse_tag("I-Com-uses-2"), parse_tag("E-Com-uses-2")]
        seq = TagSequence("x", [["a", "b", "c"]], [tags])
        out = decode_entities(seq, SCHEMA)
        assert [(e.token_start, e.token_end) for e in out] == [(1, 2)]

    def test_lone_e_is_single_token_entity(self):
        tags = [O_TAG, parse_tag("E-Com-uses-2"), O_TAG]
        seq = TagSequence("x", [["a", "b", "c"]], [tags])
        assert [(e.token_start, e.token_end) for e in decode_entities(seq, SCHEMA)] == [(1, 1)]

    def test_unclosed_b_ends_at_last_non_o(self):
        tags = [parse_tag("B-Com-uses-2"), parse_tag("I-Com-uses-2"), O_TAG]
        seq = TagSequence("x", [["a", "b", "c"]], [tags])
        assert [(e.token_start, e.token_end) for e in decode_entities(seq, SCHEMA)] == [(0, 1)]

    def test_entities_do_not_cross_sentences(self):
        b = parse_tag("B-Com-uses-2")
        i = parse_tag("I-Com-uses-2")
        seq = TagSequence("x", [["a", "b"], ["c", "d"]], [[b, i], [i, i]])
        out = decode_entities(seq, SCHEMA)
        assert [(e.sentence_index, e.token_start, e.token_end) for e in out] == [
            (0, 0, 1),
            (1, 0, 1),
        ]

    def test_positions_are_document_flat_indices(self):
        s = parse_tag("S-AP-targets-1")
        seq = TagSequence("x", [["a", "b"], ["c", "d"]], [[O_TAG, s], [O_TAG, s]])
        assert [e.position for e in decode_entities(seq, SCHEMA)] == [1, 3]

    def test_fuzz_decode_total(self):
        rng = random.Random(99)
        for _ in range(500):
            n_sent = rng.randint(1, 3)
            tokens = [[f"t{i}" for i in range(rng.randint(1, 8))] for _ in range(n_sent)]
            tags = [[TAG_ALPHABET[rng.randrange(TAG_ALPHABET_SIZE)] for _ in sent] for sent in tokens]
            decode_entities(TagSequence("f", tokens, tags), SCHEMA)


class TestRoundTrip:
    def test_random_documents_roundtrip(self):
        rng = random.Random(1234)
        for i in range(200):
            doc = random_document(rng, f"doc{i}")
            assert_roundtrip(doc)

    def test_toy_corpus_roundtrip(self, toy_docs):
        for doc in toy_docs:
            assert_roundtrip(doc)


def assert_roundtrip(doc):
    """decode(encode(doc)) recovers spans, classes and the label assignment
    re-derived independently from the raw relation slots."""
    seq = encode(doc)
    decoded = decode_entities(seq, SCHEMA)
    slots = {e.id: [] for e in doc.entities}
    for r in doc.relations:
        slots[r.head_entity_id].append((r.relation.value, "1"))
        slots[r.tail_entity_id].append((r.relation.value, "2"))
    expected = []
    for e in doc.entities:
        label = expected_entity_label(slots[e.id])
        if label is None:
            continue
        si, ti, tj = doc.entity_token_span(e)
        expected.append(((si, ti, tj), e.entity_class, label[0], label[1]))
    actual = [(e.span, e.entity_class, e.relation_label, e.role) for e in decoded]
    assert sorted(actual) == sorted(expected)


class TestBoundaryGrammar:
    def test_encoded_runs_are_s_or_b_i_star_e(self):
        """Encoder output never contains dangling B/I/E: every non-O run is a
        single S or B (I)* E within one sentence."""
        rng = random.Random(55)
        for i in range(150):
            seq = encode(random_document(rng, f"g{i}"))
            for sent in seq.tags:
                run = None
                for tag in sent:
                    b = tag.boundary
                    if run is None:
                        assert b in ("O", "S", "B")
                        if b == "B":
                            run = "open"
                    else:
                        assert b in ("I", "E")
                        if b == "E":
                            run = None
                assert run is None


class TestTagFile:
    def test_roundtrip_bit_exact(self, toy_docs):
        sequences = [encode(d) for d in toy_docs]
        text = render_tag_file(sequences)
        again = parse_tag_file(text)
        assert [s.doc_id for s in again] == [s.doc_id for s in sequences]
        for a, b in zip(again, sequences):
            assert a.tokens == b.tokens
            assert a.tags == b.tags
        assert render_tag_file(again) == text

    def test_format_shape(self, example_doc):
        text = render_tag_file([encode(example_doc)])
        lines = text.splitlines()
        assert lines[0] == "-DOCSTART- example"
        assert lines[1] == ""
        assert lines[2] == "Monitoring\tS-AP-targets-1"
        assert lines[5] == ".\tO"

    def test_malformed_line_rejected(self):
        with pytest.raises(TagParseError):
            parse_tag_file("-DOCSTART- x\n\nno_tab_here\n")
