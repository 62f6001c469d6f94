"""Basic-graph-pattern matching over an in-memory triple set.

The semantic reference for query execution: enumerate all assignments of
knowledge-graph objects to prototype-graph nodes such that every object's
type is a subtype of its node's class and every edge is backed by a triple.
Also serves /execute in fixture mode, where no SPARQL endpoint exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .graph import PrototypeGraph
from .ontology import OntologyIndex, subtypeof


@dataclass(frozen=True)
class TripleSet:
    """Instance data: predicate triples plus one type assertion per object."""

    triples: frozenset[tuple[str, str, str]]
    types: dict[str, str]

    @staticmethod
    def from_dict(doc: dict) -> "TripleSet":
        return TripleSet(
            triples=frozenset(tuple(t) for t in doc["triples"]),
            types=dict(doc["types"]),
        )

    @staticmethod
    def from_file(path: str | Path) -> "TripleSet":
        return TripleSet.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {"types": dict(self.types), "triples": sorted(self.triples)}


Binding = tuple[tuple[str, str], ...]  # ((node_id, object), ...) in node order


def bgp_match(g: PrototypeGraph, data: TripleSet, index: OntologyIndex) -> set[Binding]:
    """All satisfying assignments of objects to nodes.

    Objects qualify for a node when their asserted type is a subtype of the
    node's class; distinct nodes may bind the same object. Backtracks over
    nodes, checking each edge as soon as both endpoints are bound.
    """
    candidates: dict[str, list[str]] = {}
    for node in g.nodes:
        matching = [
            obj
            for obj, cls in sorted(data.types.items())
            if cls in index.classes and subtypeof(cls, node.class_iri, index)
        ]
        if not matching:
            return set()
        candidates[node.node_id] = matching

    order = [n.node_id for n in g.nodes]
    position = {node_id: i for i, node_id in enumerate(order)}
    # edges checkable once the k-th node is bound
    checkable: dict[int, list] = {i: [] for i in range(len(order))}
    for edge in g.edges:
        checkable[max(position[edge.tail], position[edge.head])].append(edge)

    results: set[Binding] = set()
    assignment: dict[str, str] = {}

    def recurse(i: int) -> None:
        if i == len(order):
            results.add(tuple((node_id, assignment[node_id]) for node_id in order))
            return
        node_id = order[i]
        for obj in candidates[node_id]:
            assignment[node_id] = obj
            if all(
                (assignment[e.tail], e.link_iri, assignment[e.head]) in data.triples
                for e in checkable[i]
            ):
                recurse(i + 1)
        assignment.pop(node_id, None)

    recurse(0)
    return results


def bindings_as_table(g: PrototypeGraph, bindings: set[Binding]) -> tuple[list[str], list[list[str]]]:
    """Stable (columns, rows) view of a binding set, for wire responses."""
    columns = [n.node_id for n in g.nodes]
    rows = [[dict(b)[c] for c in columns] for b in sorted(bindings)]
    return columns, rows
