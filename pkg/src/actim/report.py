"""Report artifacts: versioned JSON, delimited CSV and matplotlib figures.

Every writer here is byte-deterministic for identical inputs (sorted rows,
fixed float formatting, pinned PNG metadata) so full-pipeline runs can be
compared bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport
from .kg import CLASS_COLORS
from .ontology import EntityClass, RelationType

_PNG_METADATA = {"Software": "actim"}
_BAR_COLORS = ("#1f608b", "#e6a355", "#c76048")


def render_report_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def render_report_csv(report: EvalReport) -> str:
    """One row per scored group: level,name,precision,recall,f1,tp,fp,fn,support."""
    lines = ["level,name,precision,recall,f1,tp,fp,fn,support"]

    def row(level, name, s):
        lines.append(
            f"{level},{name},{s.precision:.6f},{s.recall:.6f},{s.f1:.6f},"
            f"{s.tp},{s.fp},{s.fn},{s.support}"
        )

    row("entity", "overall", report.overall)
    for c in EntityClass:
        if c in report.per_entity_class:
            row("entity", c.value, report.per_entity_class[c])
    row("relation", "overall", report.relation_overall)
    for r in RelationType:
        if r in report.per_relation_type:
            row("relation", r.value, report.per_relation_type[r])
    return "\n".join(lines) + "\n"


def render_history_csv(history: list[dict]) -> str:
    if not history:
        return "epoch,loss\n"
    keys = ["epoch", "loss"] + sorted(set().union(*history) - {"epoch", "loss"})
    lines = [",".join(keys)]
    for entry in history:
        cells = []
        for k in keys:
            v = entry.get(k, "")
            cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _save(fig, path: Path):
    fig.savefig(path, format="png", dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)


def _metric_bars(ax, names, scores, title):
    x = range(len(names))
    width = 0.27
    for i, (key, color) in enumerate(zip(("precision", "recall", "f1"), _BAR_COLORS)):
        ax.bar(
            [xi + (i - 1) * width for xi in x],
            [getattr(s, key) for s in scores],
            width=width,
            label=key,
            color=color,
        )
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(title)
    ax.legend(fontsize=8)


def entity_metrics_figure(report: EvalReport, path: str | Path):
    """Grouped per-class precision/recall/F1 bars for entity extraction."""
    classes = [c for c in EntityClass if c in report.per_entity_class]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    _metric_bars(
        ax,
        ["overall"] + [c.value for c in classes],
        [report.overall] + [report.per_entity_class[c] for c in classes],
        "Strict entity extraction",
    )
    fig.tight_layout()
    _save(fig, Path(path))


def relation_metrics_figure(report: EvalReport, path: str | Path):
    """Grouped per-type precision/recall/F1 bars for triple extraction."""
    rels = [r for r in RelationType if r in report.per_relation_type]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    _metric_bars(
        ax,
        ["overall"] + [r.value for r in rels],
        [report.relation_overall] + [report.per_relation_type[r] for r in rels],
        "Strict triple extraction",
    )
    fig.tight_layout()
    _save(fig, Path(path))


def training_curve_figure(history: list[dict], path: str | Path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([e["epoch"] for e in history], [e["loss"] for e in history], color=_BAR_COLORS[0])
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_title("Biased objective over epochs")
    fig.tight_layout()
    _save(fig, Path(path))


def class_distribution_figure(per_class_counts: dict, path: str | Path):
    """Entity count per class, colored with the knowledge-graph palette."""
    classes = [c for c in EntityClass]
    counts = [per_class_counts.get(c, 0) for c in classes]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(
        [c.value for c in classes],
        counts,
        color=[CLASS_COLORS[c] for c in classes],
    )
    ax.set_ylabel("entities")
    ax.set_title("Corpus entity classes")
    ax.tick_params(axis="x", rotation=45, labelsize=8)
    fig.tight_layout()
    _save(fig, Path(path))


def write_report_files(
    report: EvalReport,
    json_path: str | Path,
    csv_path: str | Path | None = None,
    figures_dir: str | Path | None = None,
) -> list[Path]:
    """Write report.json plus the delimited and figure artifacts next to it."""
    json_path = Path(json_path)
    json_path.write_text(render_report_json(report), encoding="utf-8")
    written = [json_path]
    if csv_path is None:
        csv_path = json_path.with_suffix(".csv")
    csv_path = Path(csv_path)
    csv_path.write_text(render_report_csv(report), encoding="utf-8")
    written.append(csv_path)
    if figures_dir is not None:
        figures_dir = Path(figures_dir)
        figures_dir.mkdir(parents=True, exist_ok=True)
        ent = figures_dir / "entity_metrics.png"
        rel = figures_dir / "relation_metrics.png"
        entity_metrics_figure(report, ent)
        relation_metrics_figure(report, rel)
        written += [ent, rel]
    return written
