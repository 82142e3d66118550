"""Token embedding providers.

Two modes: a file-backed provider reading pre-computed contextual vectors in
the ACTIM-EMB v1 format, and a trainable hash-bucketed lookup table for
self-contained runs.

ACTIM-EMB v1 is line-oriented text: a header ``ACTIM-EMB v1 <dim>``, then per
document a ``#doc <doc_id>`` line followed by one line per token:
``<sentence_idx> <token_idx> <f32 values space-separated>``. Values are
written with 9 significant digits so float32 round-trips exactly.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..errors import IntegrityError

_HEADER_PREFIX = "ACTIM-EMB v1 "


def render_embedding_file(docs: list[tuple[str, list[np.ndarray]]], dim: int) -> str:
    """docs: (doc_id, per-sentence matrices). Deterministic, bit-exact."""
    lines = [f"ACTIM-EMB v1 {dim}"]
    for doc_id, sentences in docs:
        lines.append(f"#doc {doc_id}")
        for si, mat in enumerate(sentences):
            mat = np.asarray(mat)
            if mat.ndim != 2 or mat.shape[1] != dim:
                raise IntegrityError(
                    f"{doc_id}: sentence {si} has shape {mat.shape}, expected (*, {dim})"
                )
            for ti in range(mat.shape[0]):
                values = " ".join(f"{float(v):.9g}" for v in mat[ti])
                lines.append(f"{si} {ti} {values}")
    return "\n".join(lines) + "\n"


class EmbeddingFile:
    """Parsed ACTIM-EMB v1 content: per-document, per-sentence vector blocks."""

    def __init__(self, dim: int, docs: dict[str, list[np.ndarray]], warnings: list[str]):
        self.dim = dim
        self.docs = docs
        self.warnings = warnings

    @classmethod
    def parse(cls, text: str) -> "EmbeddingFile":
        lines = text.splitlines()
        if not lines or not lines[0].startswith(_HEADER_PREFIX):
            raise IntegrityError("missing ACTIM-EMB v1 header")
        try:
            dim = int(lines[0][len(_HEADER_PREFIX) :])
        except ValueError:
            raise IntegrityError(f"malformed header: {lines[0]!r}") from None
        warnings: list[str] = []
        raw: dict[str, dict[int, dict[int, np.ndarray]]] = {}
        doc_id = None
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            if line.startswith("#doc "):
                doc_id = line[len("#doc ") :]
                if doc_id in raw:
                    warnings.append(f"duplicate #doc block for {doc_id!r}")
                raw.setdefault(doc_id, {})
                continue
            if doc_id is None:
                raise IntegrityError(f"line {lineno}: vector line before any #doc")
            parts = line.split()
            if len(parts) != 2 + dim:
                raise IntegrityError(
                    f"line {lineno}: expected {2 + dim} fields, got {len(parts)}"
                )
            si, ti = int(parts[0]), int(parts[1])
            vec = np.array([float(v) for v in parts[2:]], dtype=np.float64)
            sent = raw[doc_id].setdefault(si, {})
            if ti in sent:
                warnings.append(f"{doc_id}: duplicate vector for token ({si}, {ti})")
            sent[ti] = vec

        docs: dict[str, list[np.ndarray]] = {}
        for did, sents in raw.items():
            mats = []
            for si in range(len(sents)):
                if si not in sents:
                    raise IntegrityError(f"{did}: missing sentence index {si}")
                sent = sents[si]
                n = len(sent)
                if sorted(sent) != list(range(n)):
                    raise IntegrityError(f"{did}: non-contiguous token indices in sentence {si}")
                mats.append(np.stack([sent[ti] for ti in range(n)]))
            docs[did] = mats
        return cls(dim, docs, warnings)

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingFile":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


class FileBackedProvider:
    """Deterministic lookups from a pre-computed vector file."""

    mode = "file_backed"
    trainable = False

    def __init__(self, emb: EmbeddingFile):
        self.emb = emb
        self.embed_dim = emb.dim

    @classmethod
    def from_path(cls, path: str | Path) -> "FileBackedProvider":
        return cls(EmbeddingFile.load(path))

    def sentence_vectors(self, doc_id: str, sentences: list[list[str]]) -> list[np.ndarray]:
        if doc_id not in self.emb.docs:
            raise IntegrityError(f"no embeddings for document {doc_id!r}")
        mats = self.emb.docs[doc_id]
        if len(mats) != len(sentences):
            raise IntegrityError(
                f"{doc_id}: embedding file has {len(mats)} sentences, document has"
                f" {len(sentences)}"
            )
        for si, (mat, sent) in enumerate(zip(mats, sentences)):
            if mat.shape[0] != len(sent):
                raise IntegrityError(
                    f"{doc_id}: sentence {si} has {len(sent)} tokens but"
                    f" {mat.shape[0]} vectors"
                )
        return mats


class TrainableLookupProvider:
    """Hash-bucketed vocabulary; the embedding table itself lives in the
    model parameters and is trained with everything else."""

    mode = "trainable_lookup"
    trainable = True

    def __init__(self, embed_dim: int, buckets: int = 50000):
        self.embed_dim = embed_dim
        self.buckets = buckets
        self._cache: dict[str, int] = {}

    def bucket(self, token: str) -> int:
        b = self._cache.get(token)
        if b is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            b = int.from_bytes(digest, "big") % self.buckets
            self._cache[token] = b
        return b

    def bucket_ids(self, sentences: list[list[str]]) -> list[np.ndarray]:
        return [np.array([self.bucket(t) for t in sent], dtype=np.int64) for sent in sentences]
