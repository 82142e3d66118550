"""Command-line interface.

Subcommands: schema, parse, stats, encode, train, predict, extract, build-kg,
query, eval, pipeline. Logs go to stderr; artifacts go to files (or stdout
for the read-only commands). All randomness flows from one seed, overridable
via the ACTIM_SEED environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import kg as kg_mod
from . import report as report_mod
from . import triples as triples_mod
from .errors import ActimError
from .evaluation import cross_validate, evaluate_corpus
from .model import (
    FileBackedProvider,
    TrainableLookupProvider,
    TrainConfig,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from .ontology import builtin_schema
from .tagcodec import decode_entities, encode, parse_tag_file, render_tag_file

log = logging.getLogger("actim")


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """Apply --set key=value pairs; keys use dotted paths."""
    for item in overrides:
        if "=" not in item:
            raise ActimError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ActimError(f"--set path {key!r} crosses a non-object field")
        node[parts[-1]] = _coerce(raw)
    return config


def _seed_override(seed: int) -> int:
    env = os.environ.get("ACTIM_SEED")
    return int(env) if env else seed


def _train_config(data: dict, seed: int | None = None) -> TrainConfig:
    data = dict(data)
    if seed is not None:
        data["seed"] = seed
    data["seed"] = _seed_override(data.get("seed", 0))
    return TrainConfig.from_dict(data)


def _load_docs(path: Path) -> list[corpus_mod.AnnotatedDocument]:
    """Documents from a corpus.json, a single doc .json, or a .txt/.ann dir."""
    if path.is_dir():
        json_files = sorted(path.glob("*.json"))
        json_files = [p for p in json_files if p.name != "corpus.json"]
        if json_files:
            return [corpus_mod.document_from_json(p.read_text(encoding="utf-8")) for p in json_files]
        return corpus_mod.read_corpus_dir(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(data, list):
        return [corpus_mod.document_from_dict(d) for d in data]
    return [corpus_mod.document_from_dict(data)]


def _provider(spec: str | dict, config: TrainConfig):
    if spec == "lookup":
        return TrainableLookupProvider(config.embed_dim, config.embed_buckets)
    if isinstance(spec, dict):
        spec = spec["file"]
    provider = FileBackedProvider.from_path(spec)
    if provider.embed_dim != config.embed_dim:
        raise ActimError(
            f"embedding file dimension {provider.embed_dim} != config embed_dim"
            f" {config.embed_dim}"
        )
    return provider


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_schema(args) -> int:
    sys.stdout.write(builtin_schema().describe())
    return 0


def cmd_parse(args) -> int:
    docs = corpus_mod.read_corpus_dir(args.in_dir)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        (out / f"{doc.doc_id}.json").write_text(
            corpus_mod.document_to_json(doc), encoding="utf-8"
        )
    payload = [corpus_mod.document_to_dict(d) for d in docs]
    (out / "corpus.json").write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    log.info("parsed %d documents into %s", len(docs), out)
    return 0


def _stats_payload(docs) -> dict:
    stats = corpus_mod.corpus_stats(docs)
    payload = stats.to_dict()
    payload["per_document"] = [
        {
            "doc_id": d.doc_id,
            "sentences": len(d.sentences),
            "entities": len(d.entities),
            "relations": len(d.relations),
        }
        for d in docs
    ]
    return payload


def cmd_stats(args) -> int:
    docs = _load_docs(Path(args.in_path))
    payload = _stats_payload(docs)
    for key in ("documents", "sentences", "entities", "relations"):
        print(f"{key}={payload[key]}")
    for name, count in payload["per_class_entity_counts"].items():
        print(f"entities.{name}={count}")
    for name, count in payload["per_type_relation_counts"].items():
        print(f"relations.{name}={count}")
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_encode(args) -> int:
    docs = _load_docs(Path(args.in_path))
    sequences = [encode(d) for d in docs]
    Path(args.out).write_text(render_tag_file(sequences), encoding="utf-8")
    log.info("encoded %d documents", len(sequences))
    return 0


def cmd_train(args) -> int:
    config_data = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    config = _train_config(apply_overrides(config_data, args.set or []))
    sequences = parse_tag_file(Path(args.corpus).read_text(encoding="utf-8"))
    provider = _provider(args.emb, config)
    params, history = train(sequences, provider, config)
    save_checkpoint(args.out, params, config)
    history_csv = Path(args.history) if args.history else Path(args.out).with_suffix(".history.csv")
    history_csv.write_text(report_mod.render_history_csv(history), encoding="utf-8")
    report_mod.training_curve_figure(history, history_csv.with_suffix(".png"))
    log.info("trained %d epochs, final loss %.6f", len(history), history[-1]["loss"])
    return 0


def cmd_predict(args) -> int:
    params, config = load_checkpoint(args.model)
    docs = _load_docs(Path(args.in_path))
    if "embed.table" not in params and not args.emb:
        raise ActimError(
            "checkpoint was trained with file-backed embeddings; pass --emb <file>"
        )
    provider = _provider(args.emb if args.emb else "lookup", config)
    if provider.trainable != ("embed.table" in params):
        raise ActimError("provider kind does not match the checkpoint (file vs lookup)")
    sequences = [
        predict(d.token_texts(), provider, params, config, doc_id=d.doc_id) for d in docs
    ]
    Path(args.out).write_text(render_tag_file(sequences), encoding="utf-8")
    return 0


def cmd_extract(args) -> int:
    sequences = parse_tag_file(Path(args.pred).read_text(encoding="utf-8"))
    schema = builtin_schema()
    all_triples = []
    warnings: list[str] = []
    for seq in sequences:
        entities = decode_entities(seq, schema)
        triples, warns = triples_mod.match_triples(entities, schema, doc_id=seq.doc_id)
        all_triples.extend(triples)
        warnings.extend(f"{seq.doc_id}: {w}" for w in warns)
    Path(args.out).write_text(triples_mod.render_triples_jsonl(all_triples), encoding="utf-8")
    if args.warnings:
        Path(args.warnings).write_text(
            "".join(w + "\n" for w in warnings), encoding="utf-8"
        )
    for w in warnings:
        log.warning("%s", w)
    return 0


def cmd_build_kg(args) -> int:
    triples = triples_mod.parse_triples_jsonl(Path(args.triples).read_text(encoding="utf-8"))
    graph = kg_mod.build_graph(triples)
    Path(args.out).write_text(kg_mod.export_json(graph), encoding="utf-8")
    for fmt in args.export or []:
        path = Path(args.out).with_suffix(f".{fmt}")
        path.write_text(kg_mod.export(graph, fmt), encoding="utf-8")
        log.info("wrote %s", path)
    return 0


def cmd_query(args) -> int:
    graph = kg_mod.import_json(Path(args.graph).read_text(encoding="utf-8"))
    schema = builtin_schema()
    node = graph.node(args.node, schema.class_by_abbrev(args.entity_class))
    for rel, other in graph.neighbors(node, args.direction):
        print(f"{rel.value}\t{other.entity_class.value}\t{other.surface}")
    return 0


def cmd_eval(args) -> int:
    gold = parse_tag_file(Path(args.gold).read_text(encoding="utf-8"))
    pred = parse_tag_file(Path(args.pred).read_text(encoding="utf-8"))
    gold_by_id = {s.doc_id: s for s in gold}
    if sorted(gold_by_id) != sorted(s.doc_id for s in pred):
        raise ActimError("gold and predicted files cover different documents")
    pairs = [(gold_by_id[s.doc_id], s) for s in pred]
    report = evaluate_corpus(pairs)
    figures = Path(args.figures) if args.figures else Path(args.report).parent / "figures"
    report_mod.write_report_files(report, args.report, args.csv, figures)
    print(
        f"entity P={report.overall.precision:.4f} R={report.overall.recall:.4f}"
        f" F1={report.overall.f1:.4f}"
    )
    return 0


def cmd_pipeline(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    apply_overrides(config, args.set or [])
    seed = _seed_override(int(config.get("seed", 0)))
    train_cfg = _train_config(config.get("train", {}), seed=seed)
    out = Path(config["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    figures = out / "figures"
    figures.mkdir(exist_ok=True)

    # parse + stats
    docs = corpus_mod.read_corpus_dir(config["corpus_dir"])
    (out / "corpus.json").write_text(
        json.dumps([corpus_mod.document_to_dict(d) for d in docs], ensure_ascii=False, indent=2)
        + "\n",
        encoding="utf-8",
    )
    stats_payload = _stats_payload(docs)
    (out / "stats.json").write_text(
        json.dumps(stats_payload, indent=2) + "\n", encoding="utf-8"
    )
    report_mod.class_distribution_figure(
        corpus_mod.corpus_stats(docs).per_class_entity_counts, figures / "entity_classes.png"
    )

    # encode gold tags for the whole corpus
    gold = {d.doc_id: encode(d) for d in docs}
    (out / "gold.tags").write_text(
        render_tag_file([gold[d.doc_id] for d in docs]), encoding="utf-8"
    )

    split = config.get("split", {"mode": "ratio", "ratio": 0.8})
    provider = _provider(config.get("embeddings", "lookup"), train_cfg)

    if split.get("mode") == "kfold":
        result = cross_validate(docs, int(split["k"]), train_cfg, provider)
        (out / "cv_report.json").write_text(
            json.dumps(result.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        log.info("cross-validation mean entity F1: %.4f", result.mean_entity[2])
        return 0

    train_docs, test_docs = corpus_mod.split_train_test(
        docs, float(split.get("ratio", 0.8)), seed
    )
    (out / "split.json").write_text(
        json.dumps(
            {
                "train": [d.doc_id for d in train_docs],
                "test": [d.doc_id for d in test_docs],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )

    # train
    params, history = train([gold[d.doc_id] for d in train_docs], provider, train_cfg)
    save_checkpoint(out / "model.ckpt", params, train_cfg)
    (out / "history.csv").write_text(report_mod.render_history_csv(history), encoding="utf-8")
    report_mod.training_curve_figure(history, figures / "training_loss.png")

    # predict on held-out documents
    eval_docs = test_docs if test_docs else train_docs
    predictions = [
        predict(d.token_texts(), provider, params, train_cfg, doc_id=d.doc_id)
        for d in eval_docs
    ]
    (out / "pred.tags").write_text(render_tag_file(predictions), encoding="utf-8")

    # extract triples + build the knowledge graph
    schema = builtin_schema()
    all_triples = []
    warnings = []
    for seq in predictions:
        triples, warns = triples_mod.match_triples(
            decode_entities(seq, schema), schema, doc_id=seq.doc_id
        )
        all_triples.extend(triples)
        warnings.extend(f"{seq.doc_id}: {w}" for w in warns)
    (out / "triples.jsonl").write_text(
        triples_mod.render_triples_jsonl(all_triples), encoding="utf-8"
    )
    (out / "warnings.txt").write_text("".join(w + "\n" for w in warnings), encoding="utf-8")
    graph = kg_mod.build_graph(all_triples)
    (out / "graph.json").write_text(kg_mod.export_json(graph), encoding="utf-8")
    (out / "graph.graphml").write_text(kg_mod.export_graphml(graph), encoding="utf-8")
    (out / "graph.cypher").write_text(kg_mod.export_cypher(graph), encoding="utf-8")

    # strict evaluation
    pairs = [(gold[seq.doc_id], seq) for seq in predictions]
    report = evaluate_corpus(pairs)
    report_mod.write_report_files(report, out / "report.json", out / "report.csv", figures)
    log.info(
        "pipeline done: entity F1 %.4f over %d held-out documents",
        report.overall.f1,
        len(eval_docs),
    )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actim",
        description="Automotive CTI pipeline: parse, tag, train, extract, graph, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("schema", help="print the ontology").set_defaults(fn=cmd_schema)

    p = sub.add_parser("parse", help="parse .txt/.ann pairs into JSON documents")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("encode", help="encode documents into joint tags")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("train", help="train the tagger on a joint-tag file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--emb", default="lookup", help="'lookup' or an embedding file path")
    p.add_argument("--out", required=True)
    p.add_argument("--history")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="tag documents with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--emb")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("extract", help="match tagged entities into triples")
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--warnings")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("build-kg", help="build the knowledge graph from triples")
    p.add_argument("--triples", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--export", action="append", choices=["graphml", "cypher"])
    p.set_defaults(fn=cmd_build_kg)

    p = sub.add_parser("query", help="list the neighbors of a node")
    p.add_argument("--graph", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--class", dest="entity_class", required=True, help="class abbreviation")
    p.add_argument("--direction", default="out", choices=["out", "in", "both"])
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("eval", help="strict scoring of predicted against gold tags")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--csv")
    p.add_argument("--figures")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("pipeline", help="run every stage from one JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ActimError, ValueError, KeyError, OSError) as err:
        print(f"error [{args.command}]: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
