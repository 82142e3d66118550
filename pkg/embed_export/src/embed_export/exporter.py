"""One-shot export of per-token contextual vectors.

Input is the corpus dump produced by the tagging toolkit (`corpus.json`: a
list of documents whose "sentences" field holds the already-tokenized token
objects). Tokens are never re-tokenized at the word level here; each corpus
token is split into wordpieces, the final hidden states of those pieces are
mean-pooled, and exactly one vector per corpus token is written. That keeps
the file aligned 1:1 with the tags the model trains on.

Output is the ACTIM-EMB v1 text format: header "ACTIM-EMB v1 <dim>", then per
document "#doc <doc_id>" followed by "<sentence_idx> <token_idx> <values>"
lines, values printed with 9 significant digits so float32 round-trips.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch


@dataclass
class ExportManifest:
    corpus_path: str
    output_path: str
    model_id: str = "bert-base-cased"
    max_seq_len: int = 128
    pooling: str = "mean"


class AlignmentFailure(RuntimeError):
    """A whitespace token produced zero wordpieces."""


def render_embedding_file(docs: list[tuple[str, list[np.ndarray]]], dim: int) -> str:
    lines = [f"ACTIM-EMB v1 {dim}"]
    for doc_id, sentences in docs:
        lines.append(f"#doc {doc_id}")
        for si, mat in enumerate(sentences):
            for ti in range(mat.shape[0]):
                values = " ".join(f"{float(v):.9g}" for v in mat[ti])
                lines.append(f"{si} {ti} {values}")
    return "\n".join(lines) + "\n"


def load_corpus_tokens(path: str | Path) -> list[tuple[str, list[list[str]]]]:
    """(doc_id, sentences of token strings) from a corpus dump."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = [data]
    docs = []
    for doc in data:
        sentences = [[tok["text"] for tok in sent] for sent in doc["sentences"]]
        docs.append((doc["doc_id"], sentences))
    return docs


def _piece_ids_per_token(tokenizer, tokens: list[str], doc_id: str) -> list[list[int]]:
    pieces = []
    for tok in tokens:
        ids = tokenizer(tok, add_special_tokens=False)["input_ids"]
        if not ids:
            raise AlignmentFailure(
                f"{doc_id}: token {tok!r} produced no wordpieces; cannot align"
            )
        pieces.append(ids)
    return pieces


def _windows(piece_counts: list[int], budget: int):
    """Group consecutive tokens into windows whose total piece count fits the
    budget, never splitting a token's pieces."""
    start = 0
    while start < len(piece_counts):
        used = 0
        end = start
        while end < len(piece_counts) and used + piece_counts[end] <= budget:
            used += piece_counts[end]
            end += 1
        if end == start:
            end = start + 1  # a single token longer than the budget: truncate it
        yield start, end
        start = end


def _embed_sentence(model, tokenizer, tokens: list[str], max_seq_len: int, doc_id: str) -> np.ndarray:
    pieces = _piece_ids_per_token(tokenizer, tokens, doc_id)
    budget = max_seq_len - 2  # [CLS] and [SEP]
    cls_id = tokenizer.cls_token_id
    sep_id = tokenizer.sep_token_id
    out = np.zeros((len(tokens), model.config.hidden_size), dtype=np.float64)
    for start, end in _windows([len(p) for p in pieces], budget):
        window = [p[:budget] if len(p) > budget else p for p in pieces[start:end]]
        flat = [cls_id] + [i for p in window for i in p] + [sep_id]
        input_ids = torch.tensor([flat], dtype=torch.long)
        with torch.no_grad():
            hidden = model(input_ids=input_ids).last_hidden_state[0]
        pos = 1  # skip [CLS]
        for offset, p in enumerate(window):
            span = hidden[pos : pos + len(p)]
            out[start + offset] = span.mean(dim=0).double().numpy()
            pos += len(p)
    return out


def export_embeddings(manifest: ExportManifest, model=None, tokenizer=None) -> Path:
    """Write the embedding file described by the manifest; returns its path.

    model/tokenizer may be passed pre-loaded (tests use a local tiny model);
    otherwise they are loaded from manifest.model_id.
    """
    if model is None or tokenizer is None:
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(manifest.model_id)
        model = AutoModel.from_pretrained(manifest.model_id)
    torch.set_num_threads(1)  # byte-stable output across runs
    model.eval()

    docs = load_corpus_tokens(manifest.corpus_path)
    dim = model.config.hidden_size
    rendered = []
    for doc_id, sentences in docs:
        mats = []
        for tokens in sentences:
            tokens = tokens[: manifest.max_seq_len]  # mirror the trainer's truncation
            mats.append(
                _embed_sentence(model, tokenizer, tokens, manifest.max_seq_len, doc_id)
                .astype(np.float32)
            )
        rendered.append((doc_id, mats))
    out_path = Path(manifest.output_path)
    out_path.write_text(render_embedding_file(rendered, dim), encoding="utf-8")
    return out_path
