"""The document-level network: parameters, forward pass and backward pass.

Stage order is fixed: embed each sentence -> per-sentence self-attention ->
concatenate into the document matrix -> BiLSTM over the whole document ->
multi-head attention over the encoder states -> LSTM decoder -> linear +
softmax over the tag alphabet. Dropout (embedding outputs and encoder
outputs) is active only while training.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import CheckpointError, NumericError
from ..tagcodec import TAG_ALPHABET_SIZE
from .config import TrainConfig
from .layers import (
    bilstm_forward,
    bilstm_backward,
    dropout_forward,
    dropout_backward,
    log_softmax,
    lstm_forward,
    lstm_backward,
    multi_head_forward,
    multi_head_backward,
    self_attention_forward,
    self_attention_backward,
    softmax,
)

log = logging.getLogger("actim.model")


class ModelParameters:
    """All trainable tensors, keyed by name, plus their shape manifest."""

    def __init__(self, tensors: dict[str, np.ndarray]):
        self.tensors = tensors

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return sorted(self.tensors)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {k: tuple(v.shape) for k, v in sorted(self.tensors.items())}

    def copy(self) -> "ModelParameters":
        return ModelParameters({k: v.copy() for k, v in self.tensors.items()})

    def check_finite(self):
        for name, t in self.tensors.items():
            if not np.isfinite(t).all():
                raise NumericError(f"non-finite values in parameter {name}")

    @classmethod
    def expected_shapes(cls, config: TrainConfig, trainable_embedding: bool) -> dict:
        d = config.embed_dim
        h = config.encoder_hidden
        g = config.decoder_hidden
        enc_out = 2 * h
        dk = enc_out // config.num_heads
        shapes = {
            "word_attn.wq": (d, d),
            "word_attn.wk": (d, d),
            "word_attn.wv": (d, d),
            "enc.fw.w": (d, 4 * h),
            "enc.fw.u": (h, 4 * h),
            "enc.fw.b": (4 * h,),
            "enc.bw.w": (d, 4 * h),
            "enc.bw.u": (h, 4 * h),
            "enc.bw.b": (4 * h,),
            "doc_attn.wo": (enc_out, enc_out),
            "dec.w": (enc_out, 4 * g),
            "dec.u": (g, 4 * g),
            "dec.b": (4 * g,),
            "out.w": (g, TAG_ALPHABET_SIZE),
            "out.b": (TAG_ALPHABET_SIZE,),
        }
        for i in range(config.num_heads):
            shapes[f"doc_attn.h{i}.wq"] = (enc_out, dk)
            shapes[f"doc_attn.h{i}.wk"] = (enc_out, dk)
            shapes[f"doc_attn.h{i}.wv"] = (enc_out, dk)
        if trainable_embedding:
            shapes["embed.table"] = (config.embed_buckets, d)
        return shapes

    @classmethod
    def initialize(
        cls,
        config: TrainConfig,
        rng: np.random.Generator,
        trainable_embedding: bool,
    ) -> "ModelParameters":
        """Weights uniform in [-0.1, 0.1] from the seeded generator; the
        embedding table standard normal (attention scores scale with the
        squared embedding norm, so table entries at weight scale leave the
        word-attention softmax uniform and collapse token identity)."""
        shapes = cls.expected_shapes(config, trainable_embedding)
        tensors = {}
        for name in sorted(shapes):
            if name == "embed.table":
                tensors[name] = rng.standard_normal(shapes[name])
            else:
                tensors[name] = rng.uniform(-0.1, 0.1, shapes[name])
        return cls(tensors)

    def validate_against(self, config: TrainConfig):
        expected = self.expected_shapes(config, "embed.table" in self.tensors)
        actual = self.shapes()
        if expected != actual:
            missing = set(expected) - set(actual)
            extra = set(actual) - set(expected)
            bad = {
                k: (actual[k], expected[k])
                for k in set(actual) & set(expected)
                if actual[k] != expected[k]
            }
            raise CheckpointError(
                f"parameter/config mismatch: missing={sorted(missing)}"
                f" extra={sorted(extra)} bad_shapes={bad}"
            )


@dataclass
class DocumentEncoding:
    """Every intermediate representation of one document's forward pass."""

    sentence_embeddings: list[np.ndarray]
    doc_matrix: np.ndarray
    encoder_states: np.ndarray
    attended_states: np.ndarray
    decoder_states: np.ndarray
    log_probs: np.ndarray
    probs: np.ndarray
    word_attention: list[np.ndarray]
    doc_attention: list[np.ndarray]
    sentence_lengths: list[int] = field(default_factory=list)


def truncate_sentences(
    sentences: list[list], max_len: int, doc_id: str = ""
) -> list[list]:
    """Hard-truncate sentences beyond max_len tokens (gold tags are expected
    to be truncated in lockstep by callers)."""
    out = []
    for si, sent in enumerate(sentences):
        if len(sent) > max_len:
            log.warning(
                "%s: sentence %d truncated from %d to %d tokens", doc_id, si, len(sent), max_len
            )
            sent = sent[:max_len]
        out.append(sent)
    return out


def _head_weights(params: ModelParameters, num_heads: int):
    return [
        (params[f"doc_attn.h{i}.wq"], params[f"doc_attn.h{i}.wk"], params[f"doc_attn.h{i}.wv"])
        for i in range(num_heads)
    ]


def _embed(doc_tokens, provider, params, doc_id):
    """Per-sentence embedding matrices plus the index arrays needed to
    scatter gradients back into a trainable table."""
    if provider.trainable:
        ids = provider.bucket_ids(doc_tokens)
        table = params["embed.table"]
        mats = [table[i] for i in ids]
        return mats, ids
    return provider.sentence_vectors(doc_id, doc_tokens), None


def _forward(
    doc_tokens: list[list[str]],
    provider,
    params: ModelParameters,
    config: TrainConfig,
    training: bool,
    rng: np.random.Generator | None,
    doc_id: str,
):
    if not doc_tokens or sum(len(s) for s in doc_tokens) == 0:
        raise ValueError(f"empty document {doc_id!r}")
    if any(len(s) == 0 for s in doc_tokens):
        raise ValueError(f"empty sentence in document {doc_id!r}")
    if training and config.dropout_rate > 0.0 and rng is None:
        raise ValueError("training with dropout requires a random generator")
    doc_tokens = truncate_sentences(doc_tokens, config.max_seq_len, doc_id)

    embeds, bucket_ids = _embed(doc_tokens, provider, params, doc_id)
    for mat in embeds:
        if not np.isfinite(mat).all():
            raise NumericError(f"non-finite embeddings for {doc_id!r}")

    # per-sentence: dropout on embedding outputs, then word-level attention
    emb_masks, word_caches, word_attn, attended = [], [], [], []
    for mat in embeds:
        if training:
            mat, mask = dropout_forward(mat, config.dropout_rate, rng)
        else:
            mask = None
        emb_masks.append(mask)
        y, a, cache = self_attention_forward(
            mat, params["word_attn.wq"], params["word_attn.wk"], params["word_attn.wv"]
        )
        word_caches.append(cache)
        word_attn.append(a)
        attended.append(y)

    doc_matrix = np.concatenate(attended, axis=0)

    enc, enc_cache = bilstm_forward(
        doc_matrix,
        (params["enc.fw.w"], params["enc.fw.u"], params["enc.fw.b"]),
        (params["enc.bw.w"], params["enc.bw.u"], params["enc.bw.b"]),
    )
    if training:
        enc_dropped, enc_mask = dropout_forward(enc, config.dropout_rate, rng)
    else:
        enc_dropped, enc_mask = enc, None

    mh_out, doc_attn, mh_cache = multi_head_forward(
        enc_dropped, _head_weights(params, config.num_heads), params["doc_attn.wo"]
    )

    dec, dec_cache = lstm_forward(mh_out, params["dec.w"], params["dec.u"], params["dec.b"])
    logits = dec @ params["out.w"] + params["out.b"]
    log_probs = log_softmax(logits, axis=1)

    encoding = DocumentEncoding(
        sentence_embeddings=embeds,
        doc_matrix=doc_matrix,
        encoder_states=enc,
        attended_states=mh_out,
        decoder_states=dec,
        log_probs=log_probs,
        probs=softmax(logits, axis=1),
        word_attention=word_attn,
        doc_attention=doc_attn,
        sentence_lengths=[len(s) for s in doc_tokens],
    )
    cache = {
        "bucket_ids": bucket_ids,
        "emb_masks": emb_masks,
        "word_caches": word_caches,
        "enc_cache": enc_cache,
        "enc_mask": enc_mask,
        "mh_cache": mh_cache,
        "dec_cache": dec_cache,
        "dec": dec,
        "num_heads": config.num_heads,
    }
    return encoding, cache


def forward_document(
    doc_tokens: list[list[str]],
    provider,
    params: ModelParameters,
    config: TrainConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
    doc_id: str = "",
) -> DocumentEncoding:
    encoding, _ = _forward(doc_tokens, provider, params, config, training, rng, doc_id)
    return encoding


def biased_loss(log_probs: np.ndarray, gold_tags: np.ndarray, bias_weight: float) -> float:
    """Mean over tokens of w_t * (-log p(gold_t)) with w_t = 1 for O and
    bias_weight otherwise (O is tag index 0)."""
    gold = np.asarray(gold_tags)
    if gold.shape[0] != log_probs.shape[0]:
        raise ValueError(
            f"gold length {gold.shape[0]} != prediction length {log_probs.shape[0]}"
        )
    w = np.where(gold == 0, 1.0, float(bias_weight))
    nll = -log_probs[np.arange(gold.shape[0]), gold]
    return float(np.mean(w * nll))


def _loss_and_dlogits(probs, log_probs, gold, bias_weight):
    T = gold.shape[0]
    w = np.where(gold == 0, 1.0, float(bias_weight))
    nll = -log_probs[np.arange(T), gold]
    loss = float(np.mean(w * nll))
    dZ = probs.copy()
    dZ[np.arange(T), gold] -= 1.0
    dZ *= (w / T)[:, None]
    return loss, dZ


def forward_backward(
    doc_tokens: list[list[str]],
    gold_ids: np.ndarray,
    provider,
    params: ModelParameters,
    config: TrainConfig,
    training: bool = True,
    rng: np.random.Generator | None = None,
    doc_id: str = "",
):
    """One document's loss and parameter gradients."""
    encoding, cache = _forward(doc_tokens, provider, params, config, training, rng, doc_id)
    gold = np.asarray(gold_ids)
    loss, dZ = _loss_and_dlogits(encoding.probs, encoding.log_probs, gold, config.bias_weight)

    grads = {name: np.zeros_like(t) for name, t in params.tensors.items()}
    dec = cache["dec"]
    grads["out.w"] += dec.T @ dZ
    grads["out.b"] += dZ.sum(axis=0)
    dDec = dZ @ params["out.w"].T

    dMh, dW, dU, db = lstm_backward(dDec, cache["dec_cache"])
    grads["dec.w"] += dW
    grads["dec.u"] += dU
    grads["dec.b"] += db

    dEncDropped, dheads, dWo = multi_head_backward(dMh, cache["mh_cache"])
    grads["doc_attn.wo"] += dWo
    for i, (dWq, dWk, dWv) in enumerate(dheads):
        grads[f"doc_attn.h{i}.wq"] += dWq
        grads[f"doc_attn.h{i}.wk"] += dWk
        grads[f"doc_attn.h{i}.wv"] += dWv

    dEnc = dropout_backward(dEncDropped, cache["enc_mask"])
    dDocMatrix, (dWf, dUf, dbf), (dWb, dUb, dbb) = bilstm_backward(dEnc, cache["enc_cache"])
    grads["enc.fw.w"] += dWf
    grads["enc.fw.u"] += dUf
    grads["enc.fw.b"] += dbf
    grads["enc.bw.w"] += dWb
    grads["enc.bw.u"] += dUb
    grads["enc.bw.b"] += dbb

    offset = 0
    for si, cache_s in enumerate(cache["word_caches"]):
        n = encoding.sentence_lengths[si]
        dY = dDocMatrix[offset : offset + n]
        dXs, dWq, dWk, dWv = self_attention_backward(dY, cache_s)
        grads["word_attn.wq"] += dWq
        grads["word_attn.wk"] += dWk
        grads["word_attn.wv"] += dWv
        dXs = dropout_backward(dXs, cache["emb_masks"][si])
        if cache["bucket_ids"] is not None:
            np.add.at(grads["embed.table"], cache["bucket_ids"][si], dXs)
        offset += n
    return loss, grads, encoding


def compute_loss(
    doc_tokens: list[list[str]],
    gold_ids: np.ndarray,
    provider,
    params: ModelParameters,
    config: TrainConfig,
    doc_id: str = "",
) -> float:
    """Deterministic forward-only loss (no dropout), for finite differencing."""
    encoding, _ = _forward(doc_tokens, provider, params, config, False, None, doc_id)
    return biased_loss(encoding.log_probs, gold_ids, config.bias_weight)
