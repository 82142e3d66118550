"""Document-level joint extraction network.

Pipeline per document: pluggable token embeddings -> per-sentence word-level
self-attention -> concatenation into one document matrix -> BiLSTM encoder ->
multi-head attention over the document-level encoder states -> unidirectional
LSTM decoder -> per-token distribution over the 1321-tag alphabet, trained
with Adam on a biased cross-entropy that up-weights non-O gold tags.

Everything runs in double precision and is deterministic given the seed.
"""

from .config import TrainConfig
from .providers import (
    EmbeddingFile,
    FileBackedProvider,
    TrainableLookupProvider,
    render_embedding_file,
)
from .layers import bilstm_encode, multi_head_attention, self_attention
from .network import (
    DocumentEncoding,
    ModelParameters,
    biased_loss,
    compute_loss,
    forward_document,
)
from .training import GradCheckFixture, gradient_check, make_gradcheck_fixture, predict, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "TrainConfig",
    "EmbeddingFile",
    "FileBackedProvider",
    "TrainableLookupProvider",
    "render_embedding_file",
    "self_attention",
    "multi_head_attention",
    "bilstm_encode",
    "DocumentEncoding",
    "ModelParameters",
    "biased_loss",
    "compute_loss",
    "forward_document",
    "train",
    "predict",
    "gradient_check",
    "GradCheckFixture",
    "make_gradcheck_fixture",
    "load_checkpoint",
    "save_checkpoint",
]
