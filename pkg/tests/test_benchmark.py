from __future__ import annotations

import json

import pytest

from onset.benchmark import (
    BenchmarkConfig,
    QueryRecord,
    ScoreReport,
    align_raw_graph,
    run_benchmark,
)
from onset.graph import GraphEdge, GraphNode, PrototypeGraph, Stage, graph_to_json_dict
from onset.lm import OracleBackend

from .conftest import dbo_iri


def test_oracle_round_trip_scores_one(dbo_index, dbo_semantic):
    backend = OracleBackend(dbo_index)
    cfg = BenchmarkConfig(k_values=(2, 3), queries_per_k=8, seed=4)
    report = run_benchmark(
        dbo_index, dbo_semantic, backend, cfg, model="oracle", ontology_id="dbpedia"
    )
    assert report.failure_count == 0
    assert len(report.records) == 2 * 8 * 2  # two stages per query
    for row in report.aggregates():
        assert row["f1_node"] == 1.0
        assert row["f1_rel"] == 1.0
        assert row["ged_s"] == 1.0


def test_file_origin_groups_by_human_tag(tmp_path, dbo_index, dbo_semantic, worked_graph):
    entry = {
        "graph": graph_to_json_dict(worked_graph),
        "query_text": "a person and the child of a person have the alma mater of the same university",
        "origin": "human",
    }
    path = tmp_path / "human.jsonl"
    path.write_text(json.dumps(entry) + "\n", encoding="utf-8")
    backend = OracleBackend(dbo_index)
    cfg = BenchmarkConfig(query_origin="file", seed=0)
    report = run_benchmark(
        dbo_index, dbo_semantic, backend, cfg, queries_file=path, ontology_id="dbpedia"
    )
    assert {r.origin for r in report.records} == {"human"}
    assert all(r.k == 3 for r in report.records)
    assert report.aggregates()[0]["f1_node"] == 1.0


def test_resumable_by_seed_and_index(dbo_index, dbo_semantic):
    backend = OracleBackend(dbo_index)
    full = run_benchmark(
        dbo_index, dbo_semantic, backend,
        BenchmarkConfig(k_values=(3,), queries_per_k=6, seed=9),
        ontology_id="d",
    )
    partial = run_benchmark(
        dbo_index, dbo_semantic, backend,
        BenchmarkConfig(k_values=(3,), queries_per_k=6, seed=9, query_indices=(2, 4)),
        ontology_id="d",
    )
    by_id = {(r.query_id, r.stage): r for r in full.records}
    for record in partial.records:
        twin = by_id[(record.query_id, record.stage)]
        assert (record.f1_node, record.f1_rel, record.ged_s) == (
            twin.f1_node, twin.f1_rel, twin.ged_s,
        )


def test_failures_are_recorded_and_excluded(dbo_index, dbo_semantic):
    class Broken:
        kind = "mock_scripted"

        def complete(self, request):
            raise RuntimeError("backend down")

    report = run_benchmark(
        dbo_index, dbo_semantic, Broken(),
        BenchmarkConfig(k_values=(2,), queries_per_k=3, seed=0),
        ontology_id="d",
    )
    assert report.failure_count == 3
    assert report.aggregates() == []
    assert all(r.stage == "error" for r in report.records)


def test_align_raw_graph_matches_labels_case_insensitively(dbo_index):
    raw = PrototypeGraph(
        (GraphNode("a", "PERSON"), GraphNode("b", "made up thing")),
        (GraphEdge("a", "Alma Mater", "b"),),
        Stage.RAW,
    )
    aligned = align_raw_graph(raw, dbo_index)
    assert aligned.nodes[0].class_iri == dbo_iri("Person")
    assert aligned.nodes[1].class_iri.startswith("unmatched:")
    assert aligned.edges[0].link_iri == dbo_iri("almaMater")


def test_report_serialization_round_trip(dbo_index, dbo_semantic):
    backend = OracleBackend(dbo_index)
    report = run_benchmark(
        dbo_index, dbo_semantic, backend,
        BenchmarkConfig(k_values=(2,), queries_per_k=2, seed=1),
        model="oracle", ontology_id="dbpedia",
    )
    doc = report.to_json_dict()
    rebuilt = ScoreReport(records=[QueryRecord(**r) for r in doc["records"]])
    assert rebuilt.aggregates() == report.aggregates()
    text = report.to_text()
    assert "f1_node" in text and "reference" in text
    csv_text = report.records_csv()
    assert csv_text.splitlines()[0].startswith("query_id,")
    assert len(csv_text.splitlines()) == len(report.records) + 1
    agg_csv = report.aggregates_csv()
    assert agg_csv.splitlines()[0].startswith("k,")


def test_scores_stay_in_unit_interval(dbo_index, dbo_semantic):
    from onset.lm import GrammarSamplingBackend

    report = run_benchmark(
        dbo_index, dbo_semantic, GrammarSamplingBackend(seed=5, min_nodes=1),
        BenchmarkConfig(k_values=(2,), queries_per_k=6, seed=2),
        ontology_id="d",
    )
    for record in report.records:
        if record.error is None:
            for value in (record.f1_node, record.f1_rel, record.ged_s):
                assert 0.0 <= value <= 1.0
