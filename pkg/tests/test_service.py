from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from onset.config import load_config
from onset.graph import graph_to_json_dict
from onset.ontology import describe
from onset.service import create_app

from .conftest import WORKED_QUERY, FIXTURES, KG, dbo_iri
from .oracles import parse_select_query

TRACE_SCHEMA = json.loads(
    (Path(__file__).parent.parent / "src/onset/schemas/trace.schema.json").read_text()
)


@pytest.fixture(scope="module")
def client():
    cfg = load_config(FIXTURES / "service_mock.yaml")
    return TestClient(create_app(cfg))


def worked_doc(worked_graph) -> dict:
    return graph_to_json_dict(worked_graph)


def test_extract_returns_trace_and_golden_equivalent_sparql(client):
    resp = client.post("/extract", json={"query": WORKED_QUERY, "ontology": "dbpedia"})
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["status"] == "ok"
    parsed = parse_select_query(doc["sparql"])
    golden = parse_select_query(
        """SELECT DISTINCT ?person_1 ?person_2 ?university_1 WHERE {
    ?person_1 <http://dbpedia.org/ontology/child> ?person_2.
    ?person_1 <http://dbpedia.org/ontology/almaMater> ?university_1.
    ?person_2 <http://dbpedia.org/ontology/almaMater> ?university_1.
    ?person_1 a <http://dbpedia.org/ontology/Person>.
    ?person_2 a <http://dbpedia.org/ontology/Person>.
    ?university_1 a <http://dbpedia.org/ontology/University>.
}"""
    )
    assert set(parsed["patterns"]) == set(golden["patterns"])


def test_extract_response_validates_against_published_schema(client):
    import jsonschema

    resp = client.post("/extract", json={"query": WORKED_QUERY})
    assert resp.status_code == 200
    jsonschema.validate(resp.json(), TRACE_SCHEMA)


def test_extract_rejects_unknown_ontology_and_empty_query(client):
    assert client.post("/extract", json={"query": "x", "ontology": "nope"}).status_code == 400
    assert client.post("/extract", json={"query": "  "}).status_code == 400


def test_extract_surfaces_backend_failure_with_stage(client):
    resp = client.post("/extract", json={"query": "query nobody scripted"})
    assert resp.status_code == 502
    assert resp.json()["detail"]["stage"] == "raw"


def test_lm_endpoint_down_gives_502(tmp_path):
    config = tmp_path / "down.yaml"
    config.write_text(
        f"""
ontologies:
  dbpedia:
    path: {FIXTURES / 'dbpedia_excerpt.ttl'}
lm:
  kind: llama
  url: http://127.0.0.1:9/
embedding:
  kind: hash
""",
        encoding="utf-8",
    )
    client = TestClient(create_app(load_config(config)))
    resp = client.post("/extract", json={"query": "anything"})
    assert resp.status_code == 502
    assert resp.json()["detail"]["stage"] == "raw"


def test_graphs_validate_reports_flip(client, worked_graph):
    doc = worked_doc(worked_graph)
    doc["edges"][1]["from"], doc["edges"][1]["to"] = (
        doc["edges"][1]["to"],
        doc["edges"][1]["from"],
    )
    resp = client.post("/graphs/validate", json={"graph": doc, "ontology": "dbpedia"})
    assert resp.status_code == 200
    body = resp.json()
    assert not body["ok"]
    assert body["violations"] == [{"edge": 1, "kind": "flipped"}]

    corrected = client.post("/graphs/correct", json={"graph": doc}).json()
    assert corrected["edges"][1]["from"] == doc["edges"][1]["to"]
    revalidated = client.post("/graphs/validate", json={"graph": corrected}).json()
    assert revalidated["ok"]


def test_graphs_sparql_parses(client, worked_graph):
    resp = client.post("/graphs/sparql", json={"graph": worked_doc(worked_graph)})
    assert resp.status_code == 200
    parse_select_query(resp.json()["sparql"])


def test_graphs_endpoints_reject_garbage_iris(client, worked_graph):
    doc = worked_doc(worked_graph)
    doc["nodes"][0]["class"] = "not an iri"
    assert client.post("/graphs/correct", json={"graph": doc}).status_code == 422
    assert client.post("/graphs/sparql", json={"graph": doc}).status_code == 422


def test_search_identical_description_scores_one(client, dbo_index):
    text = describe(dbo_iri("almaMater"), dbo_index)
    resp = client.post("/search", json={"text": text, "kind": "links", "k": 1})
    assert resp.status_code == 200
    results = resp.json()["results"]
    assert results[0]["iri"] == dbo_iri("almaMater")
    assert results[0]["similarity"] == pytest.approx(1.0, abs=1e-6)


def test_search_attach_filter_excludes_incompatible_domains(client, dbo_index):
    text = describe(dbo_iri("almaMater"), dbo_index)
    resp = client.post(
        "/search",
        json={
            "text": text,
            "kind": "links",
            "k": 50,
            "attach_to": {"class": dbo_iri("Country"), "side": "outgoing"},
        },
    )
    iris = [r["iri"] for r in resp.json()["results"]]
    assert dbo_iri("almaMater") not in iris
    assert dbo_iri("capital") in iris  # Country -> City


def test_search_k_larger_than_corpus(client, dbo_index):
    resp = client.post("/search", json={"text": "anything", "kind": "links", "k": 50})
    assert len(resp.json()["results"]) == len(dbo_index.links)


def test_search_rejects_bad_k(client):
    assert client.post("/search", json={"text": "x", "kind": "links", "k": 0}).status_code == 400


def test_execute_fixture_mode_returns_known_binding(client, worked_graph):
    resp = client.post("/execute", json={"graph": worked_doc(worked_graph), "limit": 10})
    assert resp.status_code == 200
    body = resp.json()
    assert body["columns"] == ["person_1", "person_2", "university_1"]
    assert body["rows"] == [[KG + "alice", KG + "bob", KG + "mit"]]


def test_execute_limit_zero_keeps_columns(client, worked_graph):
    body = client.post("/execute", json={"graph": worked_doc(worked_graph), "limit": 0}).json()
    assert body["columns"] == ["person_1", "person_2", "university_1"]
    assert body["rows"] == []


def test_execute_without_endpoint_or_fixture_is_503(tmp_path, worked_graph):
    config = tmp_path / "bare.yaml"
    config.write_text(
        f"""
ontologies:
  dbpedia:
    path: {FIXTURES / 'dbpedia_excerpt.ttl'}
lm:
  kind: sampler
embedding:
  kind: hash
""",
        encoding="utf-8",
    )
    client = TestClient(create_app(load_config(config)))
    resp = client.post("/execute", json={"graph": worked_doc(worked_graph), "limit": 5})
    assert resp.status_code == 503


def test_ontology_listing_and_schema(client, dbo_index):
    listing = client.get("/ontologies").json()["ontologies"]
    assert listing[0]["id"] == "dbpedia"
    assert listing[0]["classes"] == len(dbo_index.classes)
    schema = client.get("/ontologies/dbpedia/schema").json()
    assert len(schema["classes"]) == len(dbo_index.classes)
    assert len(schema["links"]) == len(dbo_index.links)
    assert client.get("/ontologies/nope/schema").status_code == 400


def test_corrected_graphs_always_revalidate_clean(client, worked_graph):
    """Service-level invariant: anything /graphs/correct returns passes
    /graphs/validate with zero violations."""
    import random

    rng = random.Random(0)
    classes = [dbo_iri(n) for n in ("Person", "University", "Country", "Film")]
    links = [dbo_iri(n) for n in ("almaMater", "child", "director", "capital")]
    for _ in range(20):
        n = rng.randint(1, 4)
        doc = {
            "nodes": [{"id": f"v{i}", "class": rng.choice(classes)} for i in range(n)],
            "edges": [
                {
                    "from": f"v{rng.randrange(n)}",
                    "link": rng.choice(links),
                    "to": f"v{rng.randrange(n)}",
                }
                for _ in range(rng.randint(0, 4))
            ],
            "stage": "constrained",
        }
        corrected = client.post("/graphs/correct", json={"graph": doc})
        assert corrected.status_code == 200
        check = client.post("/graphs/validate", json={"graph": corrected.json()})
        assert check.json()["ok"]


def test_multiple_ontologies_require_explicit_choice(tmp_path):
    from .conftest import TOY_TTL

    toy = tmp_path / "toy.ttl"
    toy.write_text(TOY_TTL, encoding="utf-8")
    config = tmp_path / "multi.yaml"
    config.write_text(
        f"""
ontologies:
  dbpedia:
    path: {FIXTURES / 'dbpedia_excerpt.ttl'}
  toy:
    path: {toy}
lm:
  kind: sampler
embedding:
  kind: hash
""",
        encoding="utf-8",
    )
    client = TestClient(create_app(load_config(config)))
    listing = client.get("/ontologies").json()["ontologies"]
    assert {o["id"] for o in listing} == {"dbpedia", "toy"}
    resp = client.post("/extract", json={"query": "anything"})
    assert resp.status_code == 400  # ambiguous without 'ontology'
    resp = client.post("/extract", json={"query": "anything", "ontology": "toy"})
    assert resp.status_code == 200
