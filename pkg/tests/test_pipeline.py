from __future__ import annotations

import json

import pytest

from onset.graph import GraphEdge, PrototypeGraph, Stage, ViolationKind, validate_graph
from onset.lm import GrammarSamplingBackend, OracleBackend, ScriptedBackend
from onset.pipeline import PipelineStageError, run_pipeline
from onset.scoring import ged_score
from onset.semantic import build_index

from .conftest import WORKED_QUERY, dbo_iri
from .oracles import parse_select_query


def test_round_trip_recovers_oracle_graph(dbo_index, dbo_semantic, worked_graph):
    backend = OracleBackend(dbo_index, worked_graph)
    trace = run_pipeline(WORKED_QUERY, dbo_index, dbo_semantic, backend)
    assert trace.status == "ok"
    assert trace.corrected_graph.nodes == worked_graph.nodes
    assert set(trace.corrected_graph.edges) == set(worked_graph.edges)
    assert ged_score(trace.corrected_graph, worked_graph) == 1.0


def test_flipped_oracle_edge_is_reported_and_repaired(dbo_index, dbo_semantic, worked_graph):
    flipped = PrototypeGraph(
        worked_graph.nodes,
        (
            worked_graph.edges[0],
            GraphEdge("university_1", dbo_iri("almaMater"), "person_1"),  # reversed
            worked_graph.edges[2],
        ),
        Stage.SAMPLED,
    )
    backend = OracleBackend(dbo_index, flipped)
    trace = run_pipeline(WORKED_QUERY, dbo_index, dbo_semantic, backend)
    kinds = [kind for _, kind in trace.corrections.edge_violations]
    assert kinds == [ViolationKind.FLIPPED]
    assert validate_graph(trace.corrected_graph, dbo_index).ok
    assert ged_score(trace.corrected_graph, worked_graph) == 1.0


def test_candidate_stage_failure_is_labeled(dbo_index):
    class ExplodingEmbedder:
        model_id = "explodes-on-query"

        def __init__(self):
            self.built = False

        def embed(self, texts):
            import numpy as np

            if not self.built:
                self.built = True
                rng = np.random.default_rng(0)
                return rng.standard_normal((len(texts), 8))
            raise RuntimeError("query embedding refused")

    sidx = build_index(dbo_index, ExplodingEmbedder())
    backend = ScriptedBackend(['{"nodes":[{"id":"a","class":"person"}],"edges":[]}'])
    with pytest.raises(PipelineStageError) as err:
        run_pipeline("q", dbo_index, sidx, backend)
    assert err.value.stage == "candidates"


def test_raw_stage_failure_is_labeled(dbo_index, dbo_semantic):
    backend = ScriptedBackend(["not json"])
    with pytest.raises(PipelineStageError) as err:
        run_pipeline("q", dbo_index, dbo_semantic, backend)
    assert err.value.stage == "raw"


def test_empty_raw_graph_short_circuits(dbo_index, dbo_semantic):
    backend = ScriptedBackend(['{"nodes":[],"edges":[]}'])
    trace = run_pipeline("q", dbo_index, dbo_semantic, backend)
    assert trace.status == "no_graph"
    assert trace.corrected_graph.nodes == ()
    assert trace.candidate_set.classes == ()
    assert validate_graph(trace.corrected_graph, dbo_index).ok


def test_trace_is_complete_and_serializable(dbo_index, dbo_semantic, worked_graph):
    backend = OracleBackend(dbo_index, worked_graph)
    trace = run_pipeline(WORKED_QUERY, dbo_index, dbo_semantic, backend)
    doc = trace.to_json_dict(dbo_index)
    text = json.dumps(doc)  # round-trippable
    assert doc["input_query"] == WORKED_QUERY
    for key in ("raw_graph", "candidate_set", "constrained_graph", "corrected_graph"):
        assert key in doc
    assert set(doc["timings"]) >= {"raw", "candidates", "constrained", "correction", "total"}
    assert doc["config_hash"]
    assert doc["k"] == 8
    assert json.loads(text) == doc


def test_fuzzed_grammar_conforming_backend_yields_valid_graphs(dbo_index, dbo_semantic):
    """Small-scale version of the validity fuzz (the acceptance suite runs
    the full 1,000)."""
    backend = GrammarSamplingBackend(seed=11, min_nodes=1)
    for i in range(25):
        trace = run_pipeline(f"fuzz {i}", dbo_index, dbo_semantic, backend)
        if trace.status != "ok":
            continue
        assert validate_graph(trace.corrected_graph, dbo_index).ok
        if trace.corrected_graph.nodes:
            from onset.graph import to_sparql

            parse_select_query(to_sparql(trace.corrected_graph))
