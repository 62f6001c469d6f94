"""HTTP JSON API exposing extraction, graph editing support, SPARQL
generation, and query execution.

Single-process; ontologies and semantic indices are loaded at startup and
shared read-only across requests. Execution proxies to a configured SPARQL
endpoint, or evaluates against an in-memory fixture triple set in test
mode.
"""

from __future__ import annotations

import logging
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .bgp import TripleSet, bgp_match, bindings_as_table
from .config import LoadedOntology, ServiceConfig, load_indices, make_backend
from .graph import (
    GraphJsonError,
    GraphStructureError,
    PrototypeGraph,
    Stage,
    correct_graph,
    graph_from_json_dict,
    graph_to_json_dict,
    to_sparql,
    validate_graph,
)
from .ontology import Side, UnknownIriError
from .pipeline import PipelineStageError, run_pipeline
from .semantic import top_k

logger = logging.getLogger(__name__)


def create_app(cfg: ServiceConfig) -> FastAPI:
    app = FastAPI(title="onset query service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cfg.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    ontologies: dict[str, LoadedOntology] = load_indices(cfg)
    backend = make_backend(cfg)
    fixture = TripleSet.from_file(cfg.fixture_triples) if cfg.fixture_triples else None

    def pick_ontology(body: dict) -> tuple[str, LoadedOntology]:
        name = body.get("ontology")
        if name is None:
            if len(ontologies) == 1:
                return next(iter(ontologies.items()))
            raise HTTPException(400, "multiple ontologies configured; specify 'ontology'")
        if name not in ontologies:
            raise HTTPException(400, f"unknown ontology {name!r}")
        return name, ontologies[name]

    def parse_graph(body: dict) -> tuple[PrototypeGraph, LoadedOntology]:
        _, loaded = pick_ontology(body)
        doc = body.get("graph", body)
        if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
            raise HTTPException(400, "body must carry a graph with 'nodes' and 'edges'")
        try:
            return graph_from_json_dict(doc), loaded
        except (GraphJsonError, GraphStructureError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed graph document: {exc}") from exc

    @app.get("/ontologies")
    def list_ontologies() -> dict:
        return {
            "ontologies": [
                {
                    "id": name,
                    "classes": len(loaded.index.classes),
                    "links": len(loaded.index.links),
                    "sampling_mode": loaded.index.sampling_mode.value,
                }
                for name, loaded in ontologies.items()
            ]
        }

    @app.get("/ontologies/{name}/schema")
    def ontology_schema(name: str) -> dict:
        if name not in ontologies:
            raise HTTPException(400, f"unknown ontology {name!r}")
        index = ontologies[name].index
        return {
            "classes": [
                {
                    "iri": c.iri,
                    "label": c.label,
                    "description": c.description,
                    "parents": sorted(c.parents),
                    "instance_count": c.instance_count,
                }
                for c in index.classes.values()
            ],
            "links": [
                {
                    "iri": l.iri,
                    "label": l.label,
                    "description": l.description,
                    "from": l.from_type,
                    "to": l.to_type,
                    "instance_count": l.instance_count,
                }
                for l in index.links.values()
            ],
        }

    @app.post("/extract")
    def extract(body: dict) -> dict:
        query = (body.get("query") or "").strip()
        if not query:
            raise HTTPException(400, "empty query")
        name, loaded = pick_ontology(body)
        k = int(body.get("k", cfg.retrieval_k))
        if k < 1:
            raise HTTPException(400, "k must be >= 1")
        try:
            trace = run_pipeline(query, loaded.index, loaded.sidx, backend, k=k)
        except PipelineStageError as exc:
            raise HTTPException(
                502, {"stage": exc.stage, "error": str(exc.cause)}
            ) from exc
        doc = trace.to_json_dict(loaded.index)
        doc["ontology"] = name
        doc["sparql"] = (
            to_sparql(trace.corrected_graph) if trace.status == "ok" and trace.corrected_graph.nodes else None
        )
        return doc

    @app.post("/graphs/validate")
    def graphs_validate(body: dict) -> dict:
        graph, loaded = parse_graph(body)
        report = validate_graph(graph, loaded.index)
        return {
            "ok": report.ok,
            "violations": [
                {"edge": i, "kind": kind.value} for i, kind in report.edge_violations
            ],
            "node_violations": [
                {"node": i, "kind": kind.value} for i, kind in report.node_violations
            ],
        }

    @app.post("/graphs/correct")
    def graphs_correct(body: dict) -> dict:
        graph, loaded = parse_graph(body)
        try:
            corrected = correct_graph(graph, loaded.index)
        except UnknownIriError as exc:
            raise HTTPException(422, str(exc)) from exc
        return graph_to_json_dict(corrected)

    @app.post("/graphs/sparql")
    def graphs_sparql(body: dict) -> dict:
        graph, loaded = parse_graph(body)
        sparql, _ = _emittable(graph, loaded)
        return {"sparql": sparql}

    def _emittable(graph: PrototypeGraph, loaded: LoadedOntology) -> tuple[str, PrototypeGraph]:
        """SPARQL for a graph that is already schema-valid (422 otherwise)."""
        report = validate_graph(graph, loaded.index)
        if not report.ok:
            raise HTTPException(422, "graph does not validate cleanly; correct it first")
        if graph.stage not in (Stage.CORRECTED, Stage.SAMPLED):
            graph = PrototypeGraph(graph.nodes, graph.edges, Stage.CORRECTED)
        try:
            return to_sparql(graph), graph
        except GraphStructureError as exc:
            raise HTTPException(422, str(exc)) from exc

    @app.post("/search")
    def search(body: dict) -> dict:
        _, loaded = pick_ontology(body)
        text = body.get("text") or ""
        kind = body.get("kind", "classes")
        k = int(body.get("k", cfg.retrieval_k))
        if k < 1:
            raise HTTPException(400, "k must be >= 1")
        if kind not in ("classes", "links"):
            raise HTTPException(400, "kind must be 'classes' or 'links'")
        if not text.strip():
            raise HTTPException(400, "empty search text")
        attach = body.get("attach_to")
        corpus = len(loaded.index.links if kind == "links" else loaded.index.classes)
        results = top_k(text, kind, max(k, corpus), loaded.sidx)
        if attach and kind == "links":
            from .graph import attachable

            try:
                side = Side(attach.get("side", "outgoing"))
                results = [
                    r
                    for r in results
                    if attachable(r.iri, attach["class"], side, loaded.index)
                ]
            except (UnknownIriError, ValueError, KeyError) as exc:
                raise HTTPException(400, f"bad attach_to: {exc}") from exc
        results = results[:k]
        out = []
        for item in results:
            entry: dict[str, Any] = {
                "iri": item.iri,
                "similarity": item.similarity,
                "label": loaded.index.label_of(item.iri),
            }
            if kind == "links":
                link = loaded.index.links[item.iri]
                entry["from"] = link.from_type
                entry["to"] = link.to_type
            out.append(entry)
        return {"kind": kind, "results": out}

    @app.post("/execute")
    def execute(body: dict) -> dict:
        _, loaded = pick_ontology(body)
        limit = body.get("limit", 100)
        if not isinstance(limit, int) or limit < 0:
            raise HTTPException(400, "limit must be a non-negative integer")
        graph: PrototypeGraph | None = None
        sparql = body.get("sparql")
        if "graph" in body:
            graph, _ = parse_graph(body)
            sparql, graph = _emittable(graph, loaded)
        if sparql is None:
            raise HTTPException(400, "provide 'graph' or 'sparql'")

        if cfg.sparql_endpoint:
            return _proxy_execute(cfg.sparql_endpoint, sparql, limit)
        if fixture is not None:
            if graph is None:
                raise HTTPException(400, "fixture-mode execution requires 'graph'")
            bindings = bgp_match(graph, fixture, loaded.index)
            columns, rows = bindings_as_table(graph, bindings)
            return {"columns": columns, "rows": rows[:limit] if limit else []}
        raise HTTPException(503, "no SPARQL endpoint configured and no fixture mounted")

    return app


def _proxy_execute(endpoint: str, sparql: str, limit: int) -> dict:
    import httpx

    query = f"{sparql}\nLIMIT {limit}"
    try:
        resp = httpx.post(
            endpoint,
            data={"query": query},
            headers={"Accept": "application/sparql-results+json"},
            timeout=60.0,
        )
    except Exception as exc:  # noqa: BLE001
        raise HTTPException(502, f"SPARQL endpoint unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise HTTPException(resp.status_code, f"SPARQL endpoint error: {resp.text[:500]}")
    doc = resp.json()
    columns = doc.get("head", {}).get("vars", [])
    rows = [
        [binding.get(var, {}).get("value", "") for var in columns]
        for binding in doc.get("results", {}).get("bindings", [])
    ]
    if limit == 0:
        rows = []
    return {"columns": columns, "rows": rows}
