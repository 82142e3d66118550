"""In-memory CTI knowledge graph with JSON, GraphML and Cypher exports.

Nodes are (canonical surface text, entity class) pairs; edges are directed,
typed by relation, and carry the ids of the documents they were extracted
from. Only trivial surface normalization is applied (trim, collapse internal
whitespace, casefold); entity disambiguation is out of scope.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .errors import PatternViolationError
from .ontology import EntityClass, OntologySchema, RelationType, builtin_schema
from .triples import Triple

# Fixed class palette used by the GraphML export and the report figures.
CLASS_COLORS = {
    EntityClass.VEHICLE: "#1f77b4",
    EntityClass.IDENTITY: "#ff7f0e",
    EntityClass.COMPONENT: "#2ca02c",
    EntityClass.ATTACK_VECTOR: "#d62728",
    EntityClass.ATTACK_PATTERN: "#9467bd",
    EntityClass.TOOL: "#8c564b",
    EntityClass.VULNERABILITY: "#e377c2",
    EntityClass.CONSEQUENCE: "#7f7f7f",
    EntityClass.LOCATION: "#bcbd22",
    EntityClass.COURSE_OF_ACTION: "#17becf",
}


def normalize_surface(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip()).casefold()


@dataclass(frozen=True)
class Node:
    surface: str
    entity_class: EntityClass

    def key(self) -> tuple[str, str]:
        return (self.entity_class.value, self.surface)


@dataclass
class KnowledgeGraph:
    nodes: set[Node] = field(default_factory=set)
    # (head, relation, tail) -> provenance doc ids
    edges: dict[tuple[Node, RelationType, Node], set[str]] = field(default_factory=dict)

    def node(self, surface: str, entity_class: EntityClass) -> Node:
        n = Node(normalize_surface(surface), entity_class)
        if n not in self.nodes:
            raise KeyError(f"unknown node ({surface!r}, {entity_class.value})")
        return n

    def neighbors(
        self, node: Node, direction: str = "out"
    ) -> list[tuple[RelationType, Node]]:
        """Adjacent (relation, node) pairs, deterministically ordered."""
        if node not in self.nodes:
            raise KeyError(f"unknown node {node}")
        if direction not in ("out", "in", "both"):
            raise ValueError(f"direction must be out/in/both, got {direction!r}")
        found = set()
        for (head, rel, tail) in self.edges:
            if direction in ("out", "both") and head == node:
                found.add((rel, tail))
            if direction in ("in", "both") and tail == node:
                found.add((rel, head))
        return sorted(found, key=lambda p: (p[0].value, p[1].surface, p[1].entity_class.value))

    def sorted_nodes(self) -> list[Node]:
        return sorted(self.nodes, key=Node.key)

    def sorted_edges(self) -> list[tuple[Node, RelationType, Node, list[str]]]:
        return sorted(
            ((h, r, t, sorted(docs)) for (h, r, t), docs in self.edges.items()),
            key=lambda e: (e[0].key(), e[1].value, e[2].key()),
        )


def build_graph(triples: list[Triple], schema: OntologySchema | None = None) -> KnowledgeGraph:
    """Aggregate triples into a graph: nodes deduplicated by (normalized
    surface, class), identical edges merged with their provenance unioned."""
    schema = schema or builtin_schema()
    graph = KnowledgeGraph()
    for t in triples:
        if not schema.validate_triple(t.head.entity_class, t.relation, t.tail.entity_class):
            raise PatternViolationError(t.head.entity_class, t.relation, t.tail.entity_class)
        head = Node(normalize_surface(t.head.surface), t.head.entity_class)
        tail = Node(normalize_surface(t.tail.surface), t.tail.entity_class)
        graph.nodes.add(head)
        graph.nodes.add(tail)
        docs = graph.edges.setdefault((head, t.relation, tail), set())
        if t.doc_id:
            docs.add(t.doc_id)
    return graph


# ---------------------------------------------------------------------------
# Exports (all deterministic: sorted nodes and edges)
# ---------------------------------------------------------------------------


def export(graph: KnowledgeGraph, format: str) -> str:
    if format == "json":
        return export_json(graph)
    if format == "graphml":
        return export_graphml(graph)
    if format == "cypher":
        return export_cypher(graph)
    raise ValueError(f"unsupported export format: {format!r}")


def export_json(graph: KnowledgeGraph) -> str:
    """Canonical lossless form; import/export round-trips to a fixed point."""
    payload = {
        "nodes": [
            {"surface": n.surface, "class": n.entity_class.value}
            for n in graph.sorted_nodes()
        ],
        "edges": [
            {
                "head": {"surface": h.surface, "class": h.entity_class.value},
                "relation": r.value,
                "tail": {"surface": t.surface, "class": t.entity_class.value},
                "docs": docs,
            }
            for h, r, t, docs in graph.sorted_edges()
        ],
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def import_json(text: str) -> KnowledgeGraph:
    data = json.loads(text)
    graph = KnowledgeGraph()
    for n in data["nodes"]:
        graph.nodes.add(Node(n["surface"], EntityClass(n["class"])))
    for e in data["edges"]:
        head = Node(e["head"]["surface"], EntityClass(e["head"]["class"]))
        tail = Node(e["tail"]["surface"], EntityClass(e["tail"]["class"]))
        graph.nodes.add(head)
        graph.nodes.add(tail)
        graph.edges[(head, RelationType(e["relation"]), tail)] = set(e["docs"])
    return graph


def export_graphml(graph: KnowledgeGraph) -> str:
    """GraphML with class, surface and a fixed per-class color on nodes,
    relation and provenance on edges."""
    nodes = graph.sorted_nodes()
    ids = {n: f"n{i}" for i, n in enumerate(nodes)}
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="surface" for="node" attr.name="surface" attr.type="string"/>',
        '  <key id="class" for="node" attr.name="class" attr.type="string"/>',
        '  <key id="color" for="node" attr.name="color" attr.type="string"/>',
        '  <key id="relation" for="edge" attr.name="relation" attr.type="string"/>',
        '  <key id="docs" for="edge" attr.name="docs" attr.type="string"/>',
        '  <graph id="actikg" edgedefault="directed">',
    ]
    for n in nodes:
        out.append(f'    <node id="{ids[n]}">')
        out.append(f'      <data key="surface">{escape(n.surface)}</data>')
        out.append(f'      <data key="class">{escape(n.entity_class.value)}</data>')
        out.append(f'      <data key="color">{CLASS_COLORS[n.entity_class]}</data>')
        out.append("    </node>")
    for i, (h, r, t, docs) in enumerate(graph.sorted_edges()):
        out.append(f'    <edge id="e{i}" source="{ids[h]}" target="{ids[t]}">')
        out.append(f'      <data key="relation">{escape(r.value)}</data>')
        out.append(f'      <data key="docs">{escape(",".join(docs))}</data>')
        out.append("    </edge>")
    out += ["  </graph>", "</graphml>", ""]
    return "\n".join(out)


def _cypher_str(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_cypher(graph: KnowledgeGraph) -> str:
    """MERGE statements loadable into a property-graph database: one MERGE
    per node, then one relationship MERGE per edge."""
    lines = []
    for n in graph.sorted_nodes():
        lines.append(
            f"MERGE (:`{n.entity_class.value}` {{surface: {_cypher_str(n.surface)}}});"
        )
    for h, r, t, docs in graph.sorted_edges():
        doc_list = ", ".join(_cypher_str(d) for d in docs)
        lines.append(
            f"MATCH (a:`{h.entity_class.value}` {{surface: {_cypher_str(h.surface)}}})\n"
            f"MATCH (b:`{t.entity_class.value}` {{surface: {_cypher_str(t.surface)}}})\n"
            f"MERGE (a)-[:`{r.value}` {{docs: [{doc_list}]}}]->(b);"
        )
    return "\n".join(lines) + ("\n" if lines else "")
