from __future__ import annotations

import numpy as np
import pytest

from onset.graph import GraphEdge, GraphNode, PrototypeGraph, Stage
from onset.ontology import describe, load_ontology
from onset.semantic import (
    CandidateSet,
    EmbeddingError,
    HashEmbedder,
    build_index,
    candidates_for_graph,
    ontology_content_hash,
    top_k,
)

from .conftest import TOY_TTL, dbo_iri
from .oracles import cosine


class CountingEmbedder(HashEmbedder):
    def __init__(self):
        super().__init__()
        self.calls = 0

    def embed(self, texts):
        self.calls += 1
        return super().embed(texts)


class FixedEmbedder:
    """Maps known texts to fixed vectors; everything else to a fallback."""

    model_id = "fixed-test"

    def __init__(self, table: dict[str, list[float]], dim: int):
        self.table = table
        self.dim = dim

    def embed(self, texts):
        out = []
        for text in texts:
            out.append(self.table.get(text, [1.0] * self.dim))
        return np.asarray(out, dtype=np.float64)


def test_build_counts_one_vector_per_item(dbo_index, dbo_semantic):
    assert dbo_semantic.size == len(dbo_index.classes) + len(dbo_index.links)
    assert len(dbo_semantic.class_iris) == len(dbo_index.classes)


def test_warm_cache_issues_no_embedding_requests(tmp_path, toy_index):
    first = CountingEmbedder()
    build_index(toy_index, first, cache_dir=tmp_path)
    assert first.calls == 1
    second = CountingEmbedder()
    build_index(toy_index, second, cache_dir=tmp_path)
    assert second.calls == 0


def test_cache_keyed_by_ontology_content(tmp_path):
    index_a = load_ontology(TOY_TTL)
    index_b = load_ontology(TOY_TTL.replace('"Person"', '"Human"'))
    assert ontology_content_hash(index_a) != ontology_content_hash(index_b)
    embedder = CountingEmbedder()
    build_index(index_a, embedder, cache_dir=tmp_path)
    build_index(index_b, embedder, cache_dir=tmp_path)
    assert embedder.calls == 2  # different content, no false cache hit


def test_mixed_dimensions_rejected(toy_index):
    class Ragged:
        model_id = "ragged"

        def embed(self, texts):
            return [[1.0, 0.0] if i % 2 else [1.0] for i, _ in enumerate(texts)]

    with pytest.raises((EmbeddingError, ValueError)):
        build_index(toy_index, Ragged())


def test_zero_norm_vectors_rejected(toy_index):
    class Zero:
        model_id = "zero"

        def embed(self, texts):
            return np.zeros((len(texts), 4))

    with pytest.raises(EmbeddingError):
        build_index(toy_index, Zero())


def test_identical_text_ranks_first_with_unit_similarity(dbo_index, dbo_semantic):
    text = describe(dbo_iri("almaMater"), dbo_index)
    results = top_k(text, "links", 3, dbo_semantic)
    assert results[0].iri == dbo_iri("almaMater")
    assert results[0].similarity == pytest.approx(1.0, abs=1e-6)


def test_k_larger_than_corpus_returns_everything_sorted(dbo_index, dbo_semantic):
    results = top_k("person", "classes", 10_000, dbo_semantic)
    assert len(results) == len(dbo_index.classes)
    sims = [r.similarity for r in results]
    assert sims == sorted(sims, reverse=True)


def test_ranking_matches_independent_cosine(toy_index):
    """Orthogonal corpus vectors plus one aligned with the query."""
    person_text = describe("http://example.org/schema/Person", toy_index)
    university_text = describe("http://example.org/schema/University", toy_index)
    link_text = describe("http://example.org/schema/almaMater", toy_index)
    table = {
        person_text: [1.0, 0.0, 0.0, 0.0],
        university_text: [0.0, 1.0, 0.0, 0.0],
        link_text: [0.0, 0.0, 1.0, 0.0],
        "query": [0.9, 0.1, 0.0, 0.0],
    }
    sidx = build_index(toy_index, FixedEmbedder(table, 4))
    results = top_k("query", "classes", 2, sidx)
    assert results[0].iri == "http://example.org/schema/Person"
    expected = cosine(table["query"], table[person_text])
    assert results[0].similarity == pytest.approx(expected, abs=1e-6)
    expected_second = cosine(table["query"], table[university_text])
    assert results[1].similarity == pytest.approx(expected_second, abs=1e-6)


def test_top_k_rejects_bad_arguments(dbo_semantic):
    with pytest.raises(ValueError):
        top_k("x", "classes", 0, dbo_semantic)
    with pytest.raises(ValueError):
        top_k("x", "nodes", 1, dbo_semantic)


def raw_graph(node_classes: list[str], edges: list[tuple[int, str, int]] = ()) -> PrototypeGraph:
    nodes = tuple(GraphNode(f"n{i}", cls) for i, cls in enumerate(node_classes))
    graph_edges = tuple(GraphEdge(f"n{t}", link, f"n{h}") for t, link, h in edges)
    return PrototypeGraph(nodes, graph_edges, Stage.RAW)


def test_candidates_contain_expected_classes(dbo_semantic):
    candidates = candidates_for_graph(raw_graph(["person", "college"]), 3, dbo_semantic)
    iris = candidates.class_iris()
    assert dbo_iri("Person") in iris
    assert dbo_iri("University") in iris


def test_candidates_zero_edges_means_no_links(dbo_semantic):
    candidates = candidates_for_graph(raw_graph(["person", "person"]), 3, dbo_semantic)
    assert candidates.links == ()


def test_candidates_deduplicate(dbo_semantic):
    duplicated = candidates_for_graph(raw_graph(["person", "person", "person"]), 4, dbo_semantic)
    assert len(set(duplicated.class_iris())) == len(duplicated.class_iris())


def test_candidate_size_bounds(dbo_semantic):
    g = raw_graph(
        ["person", "student", "city"],
        [(0, "studied at", 1), (0, "lives in", 2)],
    )
    k = 4
    candidates = candidates_for_graph(g, k, dbo_semantic)
    assert len(candidates.links) <= k * len(g.edges)
    assert len(candidates.classes) <= k * len(g.nodes) + 2 * len(candidates.links)


def test_candidates_include_link_endpoint_closure(dbo_semantic):
    g = raw_graph(["someone", "somewhere"], [(0, "gold medalist", 1)])
    candidates = candidates_for_graph(g, 2, dbo_semantic)
    assert dbo_iri("goldMedalist") in candidates.link_iris()
    # closure: the link's endpoints are expressible as classes
    iris = candidates.class_iris()
    assert dbo_iri("SportsEvent") in iris
    assert dbo_iri("Person") in iris


def test_candidates_require_raw_stage(dbo_semantic, worked_graph):
    with pytest.raises(ValueError):
        candidates_for_graph(worked_graph, 3, dbo_semantic)


def test_corpus_insertion_order_invariance():
    shuffled = """
@prefix ex: <http://example.org/schema/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
ex:almaMater a owl:ObjectProperty ; rdfs:label "alma mater" ;
    rdfs:domain ex:Person ; rdfs:range ex:University .
ex:University a owl:Class ; rdfs:label "University" .
ex:Person a owl:Class ; rdfs:label "Person" .
"""
    a = build_index(load_ontology(TOY_TTL), HashEmbedder())
    b = build_index(load_ontology(shuffled), HashEmbedder())
    ra = top_k("a person or student", "classes", 2, a)
    rb = top_k("a person or student", "classes", 2, b)
    assert [(r.iri, round(r.similarity, 9)) for r in ra] == [
        (r.iri, round(r.similarity, 9)) for r in rb
    ]
