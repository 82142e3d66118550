"""Adam training loop, prediction and gradient verification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..tagcodec import O_TAG, TAG_ALPHABET, TAG_TO_INDEX, TagSequence, parse_tag
from .config import TrainConfig
from .network import ModelParameters, compute_loss, forward_backward, forward_document
from .providers import TrainableLookupProvider

_BETA1 = 0.9
_BETA2 = 0.999
_EPS = 1e-8


class _AdamState:
    def __init__(self, params: ModelParameters):
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.t = 0

    def step(self, params: ModelParameters, grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        bc1 = 1.0 - _BETA1**self.t
        bc2 = 1.0 - _BETA2**self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= _BETA1
            m += (1.0 - _BETA1) * g
            v *= _BETA2
            v += (1.0 - _BETA2) * g * g
            params.tensors[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + _EPS)


def _training_items(corpus: list[TagSequence], max_len: int):
    """(doc_id, sentences, flat gold ids) with tokens and gold truncated in
    lockstep to max_len."""
    items = []
    for seq in corpus:
        sentences = [sent[:max_len] for sent in seq.tokens]
        gold = [TAG_TO_INDEX[t] for sent in seq.tags for t in sent[:max_len]]
        items.append((seq.doc_id, sentences, np.array(gold, dtype=np.int64)))
    return items


def train(
    corpus: list[TagSequence],
    provider,
    config: TrainConfig,
    metric_fn=None,
) -> tuple[ModelParameters, list[dict]]:
    """Adam optimization of the biased objective over gold tag sequences.

    Fully reproducible given config.seed: the one generator drives parameter
    init, the per-epoch document order and every dropout mask. One Adam
    update per document. Returns the trained parameters and a per-epoch
    history of the mean document loss (plus metric_fn output if given).
    """
    if not corpus:
        raise ValueError("empty training corpus")
    rng = np.random.default_rng(config.seed)
    params = ModelParameters.initialize(config, rng, trainable_embedding=provider.trainable)
    state = _AdamState(params)
    items = _training_items(corpus, config.max_seq_len)
    history: list[dict] = []
    for epoch in range(config.epochs):
        losses = []
        for idx in rng.permutation(len(items)):
            doc_id, sentences, gold = items[idx]
            loss, grads, _ = forward_backward(
                sentences, gold, provider, params, config,
                training=True, rng=rng, doc_id=doc_id,
            )
            if not np.isfinite(loss):
                raise NumericError(
                    f"training diverged: non-finite loss at epoch {epoch}, doc {doc_id!r}"
                )
            state.step(params, grads, config.learning_rate)
            losses.append(loss)
        entry = {"epoch": epoch, "loss": float(np.mean(losses))}
        if metric_fn is not None:
            entry.update(metric_fn(params, epoch))
        history.append(entry)
    return params, history


def predict(
    doc_tokens: list[list[str]],
    provider,
    params: ModelParameters,
    config: TrainConfig,
    doc_id: str = "",
) -> TagSequence:
    """Per-token argmax decode. Ties resolve to the lowest tag index; tokens
    beyond max_seq_len are out of the model's view and come back as O."""
    encoding = forward_document(
        doc_tokens, provider, params, config, training=False, doc_id=doc_id
    )
    ids = np.argmax(encoding.probs, axis=1)
    tags = []
    pos = 0
    for sent in doc_tokens:
        seen = min(len(sent), config.max_seq_len)
        sent_tags = [TAG_ALPHABET[ids[pos + i]] for i in range(seen)]
        sent_tags.extend([O_TAG] * (len(sent) - seen))
        tags.append(sent_tags)
        pos += seen
    return TagSequence(doc_id, [list(s) for s in doc_tokens], tags)


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------


@dataclass
class GradCheckFixture:
    doc_tokens: list[list[str]]
    gold_ids: np.ndarray
    provider: object
    config: TrainConfig
    doc_id: str = "gradcheck"


def make_gradcheck_fixture(seed: int = 7) -> tuple[ModelParameters, GradCheckFixture]:
    """Tiny model (embed 8, hidden 6, 2 sentences x 3 tokens) small enough to
    finite-difference every parameter."""
    config = TrainConfig(
        embed_dim=8,
        encoder_hidden=6,
        decoder_hidden=6,
        dropout_rate=0.0,
        num_heads=2,
        max_seq_len=128,
        learning_rate=1e-2,
        epochs=1,
        bias_weight=15.0,
        seed=seed,
        embed_buckets=12,
    )
    provider = TrainableLookupProvider(config.embed_dim, buckets=config.embed_buckets)
    rng = np.random.default_rng(seed)
    params = ModelParameters.initialize(config, rng, trainable_embedding=True)
    doc_tokens = [["alpha", "beta", "gamma"], ["delta", "epsilon", "zeta"]]
    gold_tags = [
        "S-AP-targets-1", "B-Com-targets-2", "E-Com-targets-2",
        "O", "S-Tool-uses-2", "O",
    ]
    gold_ids = np.array([TAG_TO_INDEX[parse_tag(t)] for t in gold_tags], dtype=np.int64)
    return params, GradCheckFixture(doc_tokens, gold_ids, provider, config)


def gradient_check(
    params: ModelParameters,
    fixture: GradCheckFixture,
    epsilon: float = 1e-4,
    tensors: list[str] | None = None,
    corrupt: str | None = None,
) -> float:
    """Max relative error between analytic gradients and central finite
    differences, over every scalar of every (selected) tensor.

    Relative error per scalar is |ga - gn| / max(1e-6, |ga| + |gn|); the
    floor keeps finite-difference noise on near-zero gradients from
    dominating. `corrupt` scales one tensor's analytic gradient (negative
    control for the checker itself).
    """
    _, grads, _ = forward_backward(
        fixture.doc_tokens, fixture.gold_ids, fixture.provider, params, fixture.config,
        training=False, doc_id=fixture.doc_id,
    )
    if corrupt is not None:
        grads[corrupt] = grads[corrupt] * 1.5 + 0.05

    names = tensors if tensors is not None else sorted(grads)
    max_err = 0.0
    for name in names:
        tensor = params.tensors[name]
        flat = tensor.reshape(-1)
        ga_flat = grads[name].reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + epsilon
            lp = compute_loss(
                fixture.doc_tokens, fixture.gold_ids, fixture.provider, params,
                fixture.config, fixture.doc_id,
            )
            flat[i] = orig - epsilon
            lm = compute_loss(
                fixture.doc_tokens, fixture.gold_ids, fixture.provider, params,
                fixture.config, fixture.doc_id,
            )
            flat[i] = orig
            gn = (lp - lm) / (2.0 * epsilon)
            ga = ga_flat[i]
            err = abs(ga - gn) / max(1e-6, abs(ga) + abs(gn))
            if err > max_err:
                max_err = err
    return max_err
