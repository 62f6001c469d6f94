"""End-to-end extraction pipeline: NL query to schema-valid prototype graph.

Runs the four stages in order (open-vocabulary extraction, candidate
retrieval, vocabulary-constrained extraction, repair) and records every
intermediate product in a trace for the transparency view and for scoring.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

from . import lm
from .graph import (
    PrototypeGraph,
    Stage,
    ValidationReport,
    correct_graph,
    graph_to_json_dict,
    validate_graph,
)
from .ontology import OntologyIndex
from .semantic import CandidateSet, SemanticIndex, candidates_for_graph

DEFAULT_K = 8

_EMPTY = PrototypeGraph((), (), Stage.RAW)


class PipelineStageError(RuntimeError):
    """A stage failed; carries the stage label for error reporting."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineTrace:
    input_query: str
    raw_graph: PrototypeGraph
    candidate_set: CandidateSet
    constrained_graph: PrototypeGraph
    corrected_graph: PrototypeGraph
    corrections: ValidationReport
    timings: dict[str, float]
    config_hash: str
    k: int
    status: str = "ok"  # "ok" | "no_graph"
    dropped_edges: dict[str, int] = field(default_factory=dict)

    def to_json_dict(self, index: OntologyIndex | None = None) -> dict:
        def graph_doc(g: PrototypeGraph, labeled: bool) -> dict:
            doc = graph_to_json_dict(g)
            if labeled and index is not None:
                for node in doc["nodes"]:
                    node["label"] = index.label_of(node["class"])
                for edge in doc["edges"]:
                    edge["label"] = index.label_of(edge["link"])
            return doc

        def candidate_doc(items) -> list[dict]:
            out = []
            for item in items:
                entry = {"iri": item.iri, "similarity": item.similarity}
                if index is not None:
                    entry["label"] = index.label_of(item.iri)
                out.append(entry)
            return out

        return {
            "input_query": self.input_query,
            "status": self.status,
            "raw_graph": graph_doc(self.raw_graph, labeled=False),
            "candidate_set": {
                "classes": candidate_doc(self.candidate_set.classes),
                "links": candidate_doc(self.candidate_set.links),
            },
            "constrained_graph": graph_doc(self.constrained_graph, labeled=True),
            "corrected_graph": graph_doc(self.corrected_graph, labeled=True),
            "corrections": {
                "edges": [
                    {"index": i, "kind": kind.value}
                    for i, kind in self.corrections.edge_violations
                ],
                "nodes": [
                    {"index": i, "kind": kind.value}
                    for i, kind in self.corrections.node_violations
                ],
            },
            "timings": self.timings,
            "config_hash": self.config_hash,
            "k": self.k,
            "dropped_edges": self.dropped_edges,
        }


def config_digest(model: str, temperature: float, max_tokens: int, seed: int | None, k: int) -> str:
    """Digest of prompt texts and generation parameters, for result provenance."""
    payload = json.dumps(
        {
            "stage_instruction": lm.STAGE_INSTRUCTION,
            "query_oneshot": lm.QUERY_ONESHOT,
            "model": model,
            "temperature": temperature,
            "max_tokens": max_tokens,
            "seed": seed,
            "k": k,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def run_pipeline(
    query: str,
    index: OntologyIndex,
    sidx: SemanticIndex,
    backend,
    k: int = DEFAULT_K,
    *,
    max_tokens: int = lm.DEFAULT_MAX_TOKENS,
    temperature: float = lm.DEFAULT_TEMPERATURE,
    seed: int | None = lm.DEFAULT_SEED,
    model: str = "",
) -> PipelineTrace:
    """Execute extraction end to end; the returned corrected graph is always
    schema-valid. An empty stage-1 graph short-circuits to a "no_graph"
    trace instead of constraining over an empty vocabulary."""
    timings: dict[str, float] = {}
    digest = config_digest(model, temperature, max_tokens, seed, k)
    started = time.perf_counter()

    def clock(stage: str, start: float) -> None:
        timings[stage] = time.perf_counter() - start

    t0 = time.perf_counter()
    try:
        raw, raw_dropped = lm.extract_raw(
            query, backend, max_tokens=max_tokens, temperature=temperature, seed=seed, model=model
        )
    except Exception as exc:
        raise PipelineStageError("raw", exc) from exc
    clock("raw", t0)

    if not raw.nodes:
        timings["total"] = time.perf_counter() - started
        return PipelineTrace(
            input_query=query,
            raw_graph=raw,
            candidate_set=CandidateSet(classes=(), links=()),
            constrained_graph=PrototypeGraph((), (), Stage.CONSTRAINED),
            corrected_graph=PrototypeGraph((), (), Stage.CORRECTED),
            corrections=ValidationReport(),
            timings=timings,
            config_hash=digest,
            k=k,
            status="no_graph",
            dropped_edges={"raw": raw_dropped},
        )

    t0 = time.perf_counter()
    try:
        candidates = candidates_for_graph(raw, k, sidx)
        if not candidates.classes:
            raise ValueError("candidate retrieval produced no classes")
    except Exception as exc:
        raise PipelineStageError("candidates", exc) from exc
    clock("candidates", t0)

    t0 = time.perf_counter()
    try:
        constrained, constrained_dropped = lm.extract_constrained(
            query,
            candidates,
            backend,
            index,
            max_tokens=max_tokens,
            temperature=temperature,
            seed=seed,
            model=model,
        )
    except Exception as exc:
        raise PipelineStageError("constrained", exc) from exc
    clock("constrained", t0)

    t0 = time.perf_counter()
    try:
        corrections = validate_graph(constrained, index)
        corrected = correct_graph(constrained, index)
    except Exception as exc:
        raise PipelineStageError("correction", exc) from exc
    clock("correction", t0)
    timings["total"] = time.perf_counter() - started

    return PipelineTrace(
        input_query=query,
        raw_graph=raw,
        candidate_set=candidates,
        constrained_graph=constrained,
        corrected_graph=corrected,
        corrections=corrections,
        timings=timings,
        config_hash=digest,
        k=k,
        dropped_edges={"raw": raw_dropped, "constrained": constrained_dropped},
    )
