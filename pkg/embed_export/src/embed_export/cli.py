import argparse
import sys

from .exporter import ExportManifest, export_embeddings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export_embeddings",
        description="Run a pretrained transformer over a tokenized corpus dump"
        " and write per-token vectors in the ACTIM-EMB v1 format.",
    )
    parser.add_argument("--corpus", required=True, help="corpus.json produced by `actim parse`")
    parser.add_argument("--out", required=True, help="output .emb path")
    parser.add_argument("--model", default="bert-base-cased", help="model id or local path")
    parser.add_argument("--max-seq-len", type=int, default=128)
    args = parser.parse_args(argv)
    manifest = ExportManifest(
        corpus_path=args.corpus,
        output_path=args.out,
        model_id=args.model,
        max_seq_len=args.max_seq_len,
    )
    path = export_embeddings(manifest)
    print(f"wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
