"""Hand-sized corpus used across tests: 5 documents, 10 sentences, a spread
of entity classes and relation types, one cross-sentence relation and one
multi-relation ("M") entity pair."""

from actim.corpus import AnnotatedDocument, parse_brat


def _ann(text: str, entities, relations) -> str:
    """Entities as (brat class, surface); offsets located in the text, with
    repeated surfaces resolved left to right."""
    lines = []
    cursor = {}
    for i, (cls, surface) in enumerate(entities, start=1):
        start = text.index(surface, cursor.get(surface, 0))
        cursor[surface] = start + len(surface)
        lines.append(f"T{i}\t{cls} {start} {start + len(surface)}\t{surface}")
    lines += [
        f"R{j}\t{rel} Arg1:T{h} Arg2:T{t}"
        for j, (rel, h, t) in enumerate(relations, start=1)
    ]
    return "".join(line + "\n" for line in lines)


def toy_corpus_files() -> list[tuple[str, str, str]]:
    """(doc_id, text, ann) triples. Sentences are kept short (3-5 tokens) so
    the corpus stays memorizable by a small model."""
    docs = []

    text = "Monitoring CAN message. Firewall blocks spoofing."
    docs.append(("d1", text, _ann(
        text,
        [
            ("Attack-pattern", "Monitoring"),
            ("Component", "CAN message"),
            ("Course-of-action", "Firewall"),
            ("Attack-pattern", "spoofing"),
        ],
        [("targets", 1, 2), ("mitigates", 3, 4)],
    )))

    text = "Replay causes vehicle theft. Sedan contains airbag."
    docs.append(("d2", text, _ann(
        text,
        [
            ("Attack-pattern", "Replay"),
            ("Consequence", "vehicle theft"),
            ("Vehicle", "Sedan"),
            ("Component", "airbag"),
        ],
        [("hasImpact", 1, 2), ("consists-of", 4, 3)],
    )))

    text = "CANoe probes firmware flaw. Bosch sits in Germany."
    docs.append(("d3", text, _ann(
        text,
        [
            ("Tool", "CANoe"),
            ("Vulnerability", "firmware flaw"),
            ("Identity", "Bosch"),
            ("Location", "Germany"),
        ],
        [("targets", 1, 2), ("located-at", 3, 4)],
    )))

    # cross-sentence relation plus two multi-relation entities
    text = "Jamming uses hardware. Gateway exposes Bluetooth."
    docs.append(("d4", text, _ann(
        text,
        [
            ("Attack-pattern", "Jamming"),
            ("Tool", "hardware"),
            ("Component", "Gateway"),
            ("Attack-vector", "Bluetooth"),
        ],
        [("uses", 1, 2), ("hasInterface", 3, 4), ("targets", 1, 3)],
    )))

    text = "Spoofing rides Wi-Fi. Encryption flaw involves BMW."
    docs.append(("d5", text, _ann(
        text,
        [
            ("Attack-pattern", "Spoofing"),
            ("Attack-vector", "Wi-Fi"),
            ("Vulnerability", "Encryption flaw"),
            ("Identity", "BMW"),
        ],
        [("based-on", 1, 2), ("related-to", 3, 4)],
    )))
    return docs


def toy_corpus() -> list[AnnotatedDocument]:
    return [parse_brat(text, ann, doc_id=doc_id) for doc_id, text, ann in toy_corpus_files()]
