"""Contextual-vector exporter.

Runs a pretrained transformer over tokenized corpus documents and writes one
vector per token in the ACTIM-EMB v1 text format, mean-pooling wordpiece
vectors so the output aligns 1:1 with the corpus tokens.
"""

from .exporter import ExportManifest, export_embeddings, render_embedding_file

__all__ = ["ExportManifest", "export_embeddings", "render_embedding_file"]
