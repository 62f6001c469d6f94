"""Synthetic prototype-graph sampling and template query generation.

Samples graphs from the ontology: a seed edge drawn from the busiest links
(count-proportional in probabilistic mode), endpoints pushed down the class
hierarchy, then further edges attached to random existing nodes until the
node budget is reached. The template renderer turns a sampled graph into a
deterministic English query, one clause per edge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import GraphEdge, GraphNode, PrototypeGraph, Stage, assign_variable_names
from .ontology import LinkDef, OntologyIndex, SamplingMode, Side, links_for

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerConfig:
    top_k_links: int = 10
    depth: int = 2
    max_nodes: int = 3
    mode: SamplingMode = SamplingMode.PROBABILISTIC
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_nodes < 2:
            raise ValueError("max_nodes must be >= 2")
        if self.top_k_links < 1 or self.depth < 1:
            raise ValueError("top_k_links and depth must be >= 1")


def subtree_classes(class_iri: str, depth: int, index: OntologyIndex) -> list[str]:
    """The class plus its subtypes up to the given depth, in BFS order."""
    index.require_class(class_iri)
    out = [class_iri]
    seen = {class_iri}
    frontier = [class_iri]
    for _ in range(depth):
        nxt: list[str] = []
        for iri in frontier:
            for child in index.children_of(iri):
                if child not in seen:
                    seen.add(child)
                    out.append(child)
                    nxt.append(child)
        frontier = nxt
    return out


def _draw(items: list, counts: list[int], mode: SamplingMode, rng: np.random.Generator):
    """Count-proportional draw, uniform in uniform mode or when all counts
    are zero (the probabilistic fallback)."""
    total = sum(counts)
    if mode == SamplingMode.UNIFORM or total == 0:
        return items[int(rng.integers(len(items)))]
    probs = np.asarray(counts, dtype=np.float64) / total
    return items[int(rng.choice(len(items), p=probs))]


def downgrade_node(
    class_iri: str,
    index: OntologyIndex,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> str:
    """Push a class down its subtype subtree (possibly staying put), drawn
    per instance counts over the subtree in probabilistic mode."""
    subtree = subtree_classes(class_iri, cfg.depth, index)
    counts = [index.classes[iri].instance_count for iri in subtree]
    return _draw(subtree, counts, cfg.mode, rng)


def _draw_link(
    candidates: list[LinkDef], cfg: SamplerConfig, rng: np.random.Generator
) -> LinkDef:
    return _draw(candidates, [l.instance_count for l in candidates], cfg.mode, rng)


def sample_graph(
    index: OntologyIndex,
    cfg: SamplerConfig,
    rng: np.random.Generator | None = None,
) -> PrototypeGraph:
    """Sample a schema-valid prototype graph.

    The seed edge comes from the top-k links by instance count; each growth
    step picks a uniform existing node and side (left=incoming,
    right=outgoing), draws an attachable link from that node's top-k, and
    downgrades the new endpoint. Stops at max_nodes, or earlier when no node
    has any attachable link left (reported via logging).
    """
    if not index.links:
        raise ValueError("ontology has no links to sample from")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)

    ordered = sorted(index.links.values(), key=lambda l: (-l.instance_count, l.iri))
    seed_candidates = ordered[: cfg.top_k_links]
    seed_link = _draw_link(seed_candidates, cfg, rng)

    nodes = [
        GraphNode("n0", downgrade_node(seed_link.from_type, index, cfg, rng)),
        GraphNode("n1", downgrade_node(seed_link.to_type, index, cfg, rng)),
    ]
    edges = [GraphEdge("n0", seed_link.iri, "n1")]

    while len(nodes) < cfg.max_nodes:
        attachable_any = any(
            links_for(n.class_iri, side, index)
            for n in nodes
            for side in (Side.INCOMING, Side.OUTGOING)
        )
        if not attachable_any:
            logger.warning(
                "sampling stopped early at %d/%d nodes: no attachable links",
                len(nodes),
                cfg.max_nodes,
            )
            break
        while True:
            side = Side.INCOMING if rng.integers(2) == 0 else Side.OUTGOING
            anchor = nodes[int(rng.integers(len(nodes)))]
            candidates = links_for(anchor.class_iri, side, index)[: cfg.top_k_links]
            if candidates:
                break
        link = _draw_link(candidates, cfg, rng)
        new_id = f"n{len(nodes)}"
        if side == Side.OUTGOING:
            new_node = GraphNode(new_id, downgrade_node(link.to_type, index, cfg, rng))
            edges.append(GraphEdge(anchor.node_id, link.iri, new_id))
        else:
            new_node = GraphNode(new_id, downgrade_node(link.from_type, index, cfg, rng))
            edges.append(GraphEdge(new_id, link.iri, anchor.node_id))
        nodes.append(new_node)

    graph = PrototypeGraph(tuple(nodes), tuple(edges), Stage.SAMPLED)
    return assign_variable_names(graph, index)


_ORDINALS = [
    "first", "second", "third", "fourth", "fifth", "sixth",
    "seventh", "eighth", "ninth", "tenth", "eleventh", "twelfth",
]


def _ordinal(n: int) -> str:
    return _ORDINALS[n - 1] if n <= len(_ORDINALS) else f"{n}th"


def template_query(g: PrototypeGraph, index: OntologyIndex) -> str:
    """Deterministic English rendering of a graph, one clause per edge.

    Each clause reads "a {tail} that {link} a {head}" with lowercased
    labels, clauses joined with "and". Back-references to an already
    mentioned node use "the same {label}" when unambiguous; with several
    same-class nodes, the first-introduced one re-reads as "a {label}" and
    later ones carry ordinals from the third sibling on. Nodes without any
    edge become a bare "a {label}" clause.
    """
    positions: dict[str, tuple[int, int]] = {}
    by_class: dict[str, list[str]] = {}
    for node in g.nodes:
        by_class.setdefault(node.class_iri, []).append(node.node_id)
    for siblings in by_class.values():
        for pos, node_id in enumerate(siblings):
            positions[node_id] = (pos, len(siblings))

    labels = {n.node_id: index.require_class(n.class_iri).label.lower() for n in g.nodes}
    mentioned: set[str] = set()

    def phrase(node_id: str) -> str:
        label = labels[node_id]
        if node_id not in mentioned:
            mentioned.add(node_id)
            return f"a {label}"
        pos, total = positions[node_id]
        if total == 1 or pos == 1:
            return f"the same {label}"
        if pos == 0:
            return f"a {label}"
        return f"the same {_ordinal(pos + 1)} {label}"

    clauses = []
    for edge in g.edges:
        link_label = index.require_link(edge.link_iri).label.lower()
        tail_phrase = phrase(edge.tail)
        head_phrase = phrase(edge.head)
        clauses.append(f"{tail_phrase} that {link_label} {head_phrase}")
    connected = {e.tail for e in g.edges} | {e.head for e in g.edges}
    for node in g.nodes:
        if node.node_id not in connected:
            clauses.append(phrase(node.node_id))
    return " and ".join(clauses)
