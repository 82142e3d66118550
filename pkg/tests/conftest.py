import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toycorpus import toy_corpus, toy_corpus_files  # noqa: E402


@pytest.fixture(scope="session")
def toy_docs():
    return toy_corpus()


@pytest.fixture(scope="session")
def toy_files():
    return toy_corpus_files()


@pytest.fixture()
def toy_corpus_dir(tmp_path):
    for doc_id, text, ann in toy_corpus_files():
        (tmp_path / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        (tmp_path / f"{doc_id}.ann").write_text(ann, encoding="utf-8")
    return tmp_path


# The running example: one sentence, two entities, one relation.
EXAMPLE_TEXT = "Monitoring CAN message."
EXAMPLE_ANN = (
    "T1\tAttack-pattern 0 10\tMonitoring\n"
    "T2\tComponent 11 22\tCAN message\n"
    "R1\ttargets Arg1:T1 Arg2:T2\n"
)


@pytest.fixture()
def example_doc():
    from actim.corpus import parse_brat

    return parse_brat(EXAMPLE_TEXT, EXAMPLE_ANN, doc_id="example")
