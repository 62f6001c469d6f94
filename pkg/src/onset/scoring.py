"""Graph similarity scores: multiset F1 and size-normalized graph edit
distance.

F1 treats node classes and edge type triples as multisets (a class can
occur on several nodes). GED is computed exactly with unit costs via
branch and bound; substituting a node or edge with an equal label is free,
with a different label costs 1, and edges only ever match between matched
endpoints. Exponential, intended for graphs of at most 10 nodes.
"""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Iterable

from .graph import PrototypeGraph

MAX_GED_NODES = 10


def f1_sets(predicted: Iterable[Hashable], truth: Iterable[Hashable]) -> float:
    """Multiset F1: TP counts matched occurrences, FP/FN the leftovers.

    Both empty scores 1.0; exactly one empty scores 0.0.
    """
    pred = Counter(predicted)
    true = Counter(truth)
    tp = sum((pred & true).values())
    fp = sum(pred.values()) - tp
    fn = sum(true.values()) - tp
    if tp == fp == fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


def node_classes(g: PrototypeGraph) -> list[str]:
    return [n.class_iri for n in g.nodes]


def edge_triples(g: PrototypeGraph) -> list[tuple[str, str, str]]:
    """Edges as (tail class, link, head class) triples."""
    classes = {n.node_id: n.class_iri for n in g.nodes}
    return [(classes[e.tail], e.link_iri, classes[e.head]) for e in g.edges]


def f1_node(predicted: PrototypeGraph, truth: PrototypeGraph) -> float:
    return f1_sets(node_classes(predicted), node_classes(truth))


def f1_rel(predicted: PrototypeGraph, truth: PrototypeGraph) -> float:
    return f1_sets(edge_triples(predicted), edge_triples(truth))


def _edge_table(g: PrototypeGraph) -> dict[tuple[int, int], Counter]:
    """Link-label multisets between node index pairs."""
    pos = {n.node_id: i for i, n in enumerate(g.nodes)}
    table: dict[tuple[int, int], Counter] = {}
    for edge in g.edges:
        key = (pos[edge.tail], pos[edge.head])
        table.setdefault(key, Counter())[edge.link_iri] += 1
    return table


def _pair_cost(a: Counter | None, b: Counter | None) -> int:
    """Edit cost between two parallel-edge multisets: equal labels match
    free, the rest are substituted then inserted/deleted."""
    ca = sum(a.values()) if a else 0
    cb = sum(b.values()) if b else 0
    if not a or not b:
        return max(ca, cb)
    return max(ca, cb) - sum((a & b).values())


def ged_distance(g1: PrototypeGraph, g2: PrototypeGraph) -> int:
    """Exact graph edit distance under unit costs (branch and bound)."""
    if len(g1.nodes) > MAX_GED_NODES or len(g2.nodes) > MAX_GED_NODES:
        raise ValueError(
            f"graphs exceed the exact GED budget of {MAX_GED_NODES} nodes: "
            f"{len(g1.nodes)} vs {len(g2.nodes)}"
        )
    ca = [n.class_iri for n in g1.nodes]
    cb = [n.class_iri for n in g2.nodes]
    ea = _edge_table(g1)
    eb = _edge_table(g2)
    m, n = len(ca), len(cb)

    # edge labels incident to node index >= i (for the remaining-edge bound)
    def labels_from(table: dict[tuple[int, int], Counter], cutoff_used) -> Counter:
        acc: Counter = Counter()
        for (t, h), links in table.items():
            if cutoff_used(t) or cutoff_used(h):
                acc += links
        return acc

    best = [_upper_bound(ca, cb, ea, eb)]

    def finish_cost(mapping: list[int], used: set[int]) -> int:
        cost = n - len(used)  # unmatched g2 nodes inserted
        for (t, h), links in eb.items():
            if t not in used or h not in used:
                cost += sum(links.values())
        return cost

    def edge_delta(i: int, j: int, mapping: list[int]) -> int:
        """Edge costs settled by assigning g1 node i -> j (-1 = delete)."""
        loops = ea.get((i, i))
        if j == -1:
            cost = sum(loops.values()) if loops else 0
        else:
            cost = _pair_cost(loops, eb.get((j, j)))
        for i2 in range(i):
            j2 = mapping[i2]
            for (s1, t1), (s2, t2) in (((i, i2), (j, j2)), ((i2, i), (j2, j))):
                a = ea.get((s1, t1))
                if j == -1 or j2 == -1:
                    cost += sum(a.values()) if a else 0
                else:
                    cost += _pair_cost(a, eb.get((s2, t2)))
        return cost

    def lower_bound(i: int, used: set[int]) -> int:
        rem1 = Counter(ca[i:])
        rem2 = Counter(cb[j] for j in range(n) if j not in used)
        common = sum((rem1 & rem2).values())
        node_lb = max(m - i, n - len(used)) - common
        e1 = labels_from(ea, lambda x: x >= i)
        e2 = labels_from(eb, lambda x: x not in used)
        edge_lb = max(sum(e1.values()), sum(e2.values())) - sum((e1 & e2).values())
        return max(node_lb, 0) + edge_lb

    def recurse(i: int, cost: int, mapping: list[int], used: set[int]) -> None:
        if cost + lower_bound(i, used) >= best[0]:
            return
        if i == m:
            total = cost + finish_cost(mapping, used)
            if total < best[0]:
                best[0] = total
            return
        # try same-label targets first so identical graphs resolve immediately
        targets = sorted(
            (j for j in range(n) if j not in used),
            key=lambda j: (ca[i] != cb[j], j),
        )
        for j in targets:
            step = (ca[i] != cb[j]) + edge_delta(i, j, mapping)
            mapping.append(j)
            used.add(j)
            recurse(i + 1, cost + step, mapping, used)
            used.remove(j)
            mapping.pop()
        step = 1 + edge_delta(i, -1, mapping)
        mapping.append(-1)
        recurse(i + 1, cost + step, mapping, used)
        mapping.pop()

    recurse(0, 0, [], set())
    return best[0]


def _upper_bound(ca, cb, ea, eb) -> int:
    """Delete-everything/insert-everything path, always valid."""
    return (
        len(ca)
        + len(cb)
        + sum(sum(c.values()) for c in ea.values())
        + sum(sum(c.values()) for c in eb.values())
        + 1
    )


def ged_score(g1: PrototypeGraph, g2: PrototypeGraph) -> float:
    """Normalized inverted GED in [0, 1].

    1 - GED / (max node count + max edge count); two empty graphs score 1.0
    by convention (the denominator would be zero and the distance is zero).
    """
    denom = max(len(g1.nodes), len(g2.nodes)) + max(len(g1.edges), len(g2.edges))
    if denom == 0:
        return 1.0
    value = 1.0 - ged_distance(g1, g2) / denom
    return min(1.0, max(0.0, value))
