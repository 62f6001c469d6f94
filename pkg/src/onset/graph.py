"""Prototype graphs: typed node/edge structures, schema validation against
an ontology, the two repair rules (flip, discard), and SPARQL emission.

A prototype graph is the unit flowing through the whole extraction pipeline;
earlier stages may hold free-text class/link names, later stages hold
resolved iris and are schema-valid by construction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .ontology import OntologyIndex, Side, UnknownIriError, subtypeof


class Stage(str, Enum):
    RAW = "raw"
    CONSTRAINED = "constrained"
    CORRECTED = "corrected"
    SAMPLED = "sampled"


class ViolationKind(str, Enum):
    FLIPPED = "flipped"
    INVALID = "invalid"
    UNKNOWN_CLASS = "unknown_class"
    UNKNOWN_LINK = "unknown_link"


@dataclass(frozen=True)
class GraphNode:
    node_id: str
    class_iri: str


@dataclass(frozen=True)
class GraphEdge:
    tail: str
    link_iri: str
    head: str


@dataclass(frozen=True)
class PrototypeGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    stage: Stage

    def node_by_id(self, node_id: str) -> GraphNode:
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        raise KeyError(node_id)

    def class_of(self, node_id: str) -> str:
        return self.node_by_id(node_id).class_iri


@dataclass
class ValidationReport:
    """Per-edge violations plus node-level unknown classes (report-only)."""

    edge_violations: list[tuple[int, ViolationKind]] = field(default_factory=list)
    node_violations: list[tuple[int, ViolationKind]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.edge_violations and not self.node_violations


class GraphStructureError(ValueError):
    """Edge endpoints that do not reference existing nodes, or a bad stage."""


def make_graph(
    nodes: list[GraphNode] | tuple[GraphNode, ...],
    edges: list[GraphEdge] | tuple[GraphEdge, ...],
    stage: Stage,
) -> PrototypeGraph:
    """Construct a graph, checking that every edge endpoint resolves."""
    ids = {n.node_id for n in nodes}
    if len(ids) != len(tuple(nodes)):
        raise GraphStructureError("duplicate node_id")
    for edge in edges:
        if edge.tail not in ids or edge.head not in ids:
            raise GraphStructureError(f"edge references undefined node: {edge}")
    return PrototypeGraph(tuple(nodes), tuple(edges), stage)


def validate_graph(g: PrototypeGraph, index: OntologyIndex) -> ValidationReport:
    """Classify each edge as valid, flipped, invalid, or unknown.

    "Flipped" means the edge is invalid as written but valid with tail and
    head exchanged; "invalid" means valid in neither orientation. Unresolvable
    iris yield unknown_class/unknown_link entries. Report-only: the graph is
    never modified.
    """
    report = ValidationReport()
    for i, node in enumerate(g.nodes):
        if node.class_iri not in index.classes:
            report.node_violations.append((i, ViolationKind.UNKNOWN_CLASS))
    classes = {n.node_id: n.class_iri for n in g.nodes}
    for i, edge in enumerate(g.edges):
        tail_class = classes[edge.tail]
        head_class = classes[edge.head]
        if tail_class not in index.classes or head_class not in index.classes:
            report.edge_violations.append((i, ViolationKind.UNKNOWN_CLASS))
            continue
        if edge.link_iri not in index.links:
            report.edge_violations.append((i, ViolationKind.UNKNOWN_LINK))
            continue
        link = index.links[edge.link_iri]
        as_written = subtypeof(tail_class, link.from_type, index) and subtypeof(
            head_class, link.to_type, index
        )
        if as_written:
            continue
        reversed_ok = subtypeof(head_class, link.from_type, index) and subtypeof(
            tail_class, link.to_type, index
        )
        kind = ViolationKind.FLIPPED if reversed_ok else ViolationKind.INVALID
        report.edge_violations.append((i, kind))
    return report


def correct_graph(g: PrototypeGraph, index: OntologyIndex) -> PrototypeGraph:
    """Repair a graph into schema validity: reverse flipped edges, discard
    invalid ones. Nodes are never removed, even when left isolated.

    Raises UnknownIriError when any class or link iri does not resolve;
    unknown iris are an upstream constraint failure, not repairable here.
    """
    report = validate_graph(g, index)
    unknown = [k for _, k in report.edge_violations + report.node_violations
               if k in (ViolationKind.UNKNOWN_CLASS, ViolationKind.UNKNOWN_LINK)]
    if unknown:
        raise UnknownIriError(f"graph contains unresolvable iris: {unknown[0].value}")
    to_flip = {i for i, k in report.edge_violations if k == ViolationKind.FLIPPED}
    to_drop = {i for i, k in report.edge_violations if k == ViolationKind.INVALID}
    edges = []
    for i, edge in enumerate(g.edges):
        if i in to_drop:
            continue
        if i in to_flip:
            edge = GraphEdge(tail=edge.head, link_iri=edge.link_iri, head=edge.tail)
        edges.append(edge)
    return PrototypeGraph(g.nodes, tuple(edges), Stage.CORRECTED)


def to_sparql(g: PrototypeGraph) -> str:
    """Compile a corrected or sampled graph to a SELECT DISTINCT query.

    One variable per node (named after node_id), one triple pattern per edge,
    then one rdf:type pattern per node, all in input order.
    """
    if g.stage not in (Stage.CORRECTED, Stage.SAMPLED):
        raise GraphStructureError(f"cannot emit SPARQL for stage {g.stage.value}")
    if not g.nodes:
        raise GraphStructureError("cannot emit SPARQL for an empty graph")
    for node in g.nodes:
        if not _VARNAME_RE.fullmatch(node.node_id):
            raise GraphStructureError(f"node_id {node.node_id!r} is not a SPARQL variable name")
    lines = ["SELECT DISTINCT " + " ".join(f"?{n.node_id}" for n in g.nodes) + " WHERE {"]
    for edge in g.edges:
        lines.append(f"    ?{edge.tail} <{edge.link_iri}> ?{edge.head}.")
    for node in g.nodes:
        lines.append(f"    ?{node.node_id} a <{node.class_iri}>.")
    lines.append("}")
    return "\n".join(lines)


_VARNAME_RE = re.compile(r"[A-Za-z0-9_]+")


def sanitize_node_id(raw: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_]", "_", raw)
    return cleaned or "n"


class GraphJsonError(ValueError):
    """Document is not JSON or lacks the required graph fields."""


def graph_from_json(text: str, stage: Stage = Stage.RAW) -> tuple[PrototypeGraph, int]:
    """Parse the LM output schema into a graph.

    The wire shape is {"nodes": [{"id", "class"}], "edges": [{"from",
    "link", "to"}]}; class/link values are free text at the raw stage and
    candidate labels at the constrained stage. Duplicate node ids get a
    numeric suffix; ids are sanitized to SPARQL-safe variable names. Returns
    the graph and the number of edges dropped for referencing undefined ids.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphJsonError(f"not JSON: {exc}") from exc
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise GraphJsonError("missing required top-level fields 'nodes' and 'edges'")
    if not isinstance(doc["nodes"], list) or not isinstance(doc["edges"], list):
        raise GraphJsonError("'nodes' and 'edges' must be arrays")

    nodes: list[GraphNode] = []
    id_map: dict[str, str] = {}  # original id -> assigned id of first occurrence
    used: set[str] = set()
    for entry in doc["nodes"]:
        if not isinstance(entry, dict) or "id" not in entry or "class" not in entry:
            raise GraphJsonError(f"node entry missing 'id'/'class': {entry!r}")
        raw_id, cls = entry["id"], entry["class"]
        if not isinstance(raw_id, str) or not isinstance(cls, str):
            raise GraphJsonError(f"node fields must be strings: {entry!r}")
        assigned = sanitize_node_id(raw_id)
        if assigned in used:
            counter = 2
            while f"{assigned}_{counter}" in used:
                counter += 1
            assigned = f"{assigned}_{counter}"
        used.add(assigned)
        id_map.setdefault(raw_id, assigned)
        nodes.append(GraphNode(node_id=assigned, class_iri=cls))

    edges: list[GraphEdge] = []
    dropped = 0
    for entry in doc["edges"]:
        if not isinstance(entry, dict) or any(k not in entry for k in ("from", "link", "to")):
            raise GraphJsonError(f"edge entry missing 'from'/'link'/'to': {entry!r}")
        tail, link, head = entry["from"], entry["link"], entry["to"]
        if not all(isinstance(v, str) for v in (tail, link, head)):
            raise GraphJsonError(f"edge fields must be strings: {entry!r}")
        if tail not in id_map or head not in id_map:
            dropped += 1
            continue
        edges.append(GraphEdge(tail=id_map[tail], link_iri=link, head=id_map[head]))
    return PrototypeGraph(tuple(nodes), tuple(edges), stage), dropped


def graph_to_json_dict(g: PrototypeGraph) -> dict:
    return {
        "nodes": [{"id": n.node_id, "class": n.class_iri} for n in g.nodes],
        "edges": [{"from": e.tail, "link": e.link_iri, "to": e.head} for e in g.edges],
        "stage": g.stage.value,
    }


def graph_from_json_dict(doc: dict) -> PrototypeGraph:
    """Inverse of graph_to_json_dict for trusted documents (no renaming)."""
    stage = Stage(doc.get("stage", Stage.RAW.value))
    nodes = [GraphNode(n["id"], n["class"]) for n in doc["nodes"]]
    edges = [GraphEdge(e["from"], e["link"], e["to"]) for e in doc["edges"]]
    return make_graph(nodes, edges, stage)


def variable_base(label: str) -> str:
    """Lowercased label with non-alphanumerics mapped to underscores."""
    return re.sub(r"[^a-z0-9]", "_", label.lower()) or "n"


def assign_variable_names(g: PrototypeGraph, index: OntologyIndex) -> PrototypeGraph:
    """Rename nodes to "{lowercased class label}_{counter}" handles.

    Counters are 1-based per distinct base name in node order, producing the
    ?person_1 / ?person_2 / ?university_1 style used in emitted queries.
    Requires resolvable class iris.
    """
    seen: dict[str, int] = {}
    renames: dict[str, str] = {}
    nodes = []
    for node in g.nodes:
        base = variable_base(index.require_class(node.class_iri).label)
        seen[base] = seen.get(base, 0) + 1
        new_id = f"{base}_{seen[base]}"
        renames[node.node_id] = new_id
        nodes.append(replace(node, node_id=new_id))
    edges = [
        GraphEdge(tail=renames[e.tail], link_iri=e.link_iri, head=renames[e.head])
        for e in g.edges
    ]
    return PrototypeGraph(tuple(nodes), tuple(edges), g.stage)


def attachable(link_iri: str, node_class: str, side: Side, index: OntologyIndex) -> bool:
    """Whether a link can attach to a node of node_class on the given side."""
    link = index.require_link(link_iri)
    anchor = link.from_type if side == Side.OUTGOING else link.to_type
    return subtypeof(node_class, anchor, index)
