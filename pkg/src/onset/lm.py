"""Gateway to grammar-capable LM inference servers, plus deterministic
mock backends for hermetic tests.

The primary wire protocol is the llama.cpp-server completion API (POST
/completion with a "grammar" field). An OpenAI-compatible chat endpoint
with JSON-schema response formatting is available as a fallback mode for
servers without GBNF support. Every completion that is supposed to follow
a grammar is re-checked with the reference recognizer; a failure means the
server did not honor the constraint and is surfaced as such.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .grammar import GrammarSpec, recognize, sample_string, static_schema_grammar
from .graph import (
    GraphEdge,
    GraphNode,
    PrototypeGraph,
    Stage,
    assign_variable_names,
    graph_from_json,
)
from .ontology import OntologyIndex, local_name
from .semantic import CandidateSet

_PROMPT_DIR = Path(__file__).parent / "prompts"

STAGE_INSTRUCTION = (_PROMPT_DIR / "stage_instruction.txt").read_text(encoding="utf-8")
QUERY_ONESHOT = (_PROMPT_DIR / "query_oneshot.txt").read_text(encoding="utf-8")

DEFAULT_TEMPERATURE = 0.2
DEFAULT_MAX_TOKENS = 1024
DEFAULT_SEED = 1234
DEFAULT_MAX_IN_FLIGHT = 4


class BackendError(RuntimeError):
    """Transport-level failure talking to an inference server."""


class NonConformingOutputError(BackendError):
    """The server returned text outside the requested grammar."""

    def __init__(self, message: str, completion: str):
        super().__init__(f"{message}; offending completion: {completion[:500]!r}")
        self.completion = completion


@dataclass(frozen=True)
class LmRequest:
    prompt: str
    grammar: GrammarSpec | None = None
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE
    seed: int | None = DEFAULT_SEED
    model: str = ""


class LlamaCppBackend:
    """Grammar-enforcing completion endpoint (llama.cpp server wire format)."""

    kind = "grammar_http"

    def __init__(
        self,
        url: str,
        model: str = "",
        timeout: float = 120.0,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    ):
        self.url = url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)

    def complete(self, request: LmRequest) -> str:
        import httpx

        payload: dict = {
            "prompt": request.prompt,
            "n_predict": request.max_tokens,
            "temperature": request.temperature,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        if request.model or self.model:
            payload["model"] = request.model or self.model
        if request.grammar is not None:
            payload["grammar"] = request.grammar.text
        with self._slots:
            try:
                resp = httpx.post(f"{self.url}/completion", json=payload, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()["content"]
            except Exception as exc:  # noqa: BLE001
                raise BackendError(f"completion request failed: {exc}") from exc


class OpenAiJsonBackend:
    """Fallback for OpenAI-compatible servers: grammar vocabularies are
    translated to a JSON-schema response format (enums for the class and
    link fields)."""

    kind = "grammar_http"

    def __init__(
        self,
        url: str,
        model: str,
        timeout: float = 120.0,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    ):
        self.url = url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)

    @staticmethod
    def _schema(grammar: GrammarSpec | None) -> dict:
        class_field: dict = {"type": "string"}
        link_field: dict = {"type": "string"}
        max_edges: int | None = None
        if grammar is not None and grammar.vocab is not None:
            class_labels, link_labels = grammar.vocab
            class_field = {"type": "string", "enum": list(class_labels)}
            if link_labels:
                link_field = {"type": "string", "enum": list(link_labels)}
            else:
                max_edges = 0
        edges: dict = {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"from": {"type": "string"}, "link": link_field, "to": {"type": "string"}},
                "required": ["from", "link", "to"],
                "additionalProperties": False,
            },
        }
        if max_edges is not None:
            edges["maxItems"] = max_edges
        return {
            "type": "object",
            "properties": {
                "nodes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"id": {"type": "string"}, "class": class_field},
                        "required": ["id", "class"],
                        "additionalProperties": False,
                    },
                },
                "edges": edges,
            },
            "required": ["nodes", "edges"],
            "additionalProperties": False,
        }

    def complete(self, request: LmRequest) -> str:
        import httpx

        payload = {
            "model": request.model or self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": "graph", "schema": self._schema(request.grammar)},
            },
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        with self._slots:
            try:
                resp = httpx.post(
                    f"{self.url}/v1/chat/completions", json=payload, timeout=self.timeout
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001
                raise BackendError(f"chat completion request failed: {exc}") from exc


class ScriptedBackend:
    """Returns canned completions in order; for tests."""

    kind = "mock_scripted"

    def __init__(self, completions: list[str]):
        self.completions = list(completions)
        self.requests: list[LmRequest] = []

    def complete(self, request: LmRequest) -> str:
        self.requests.append(request)
        if not self.completions:
            raise BackendError("scripted backend ran out of completions")
        return self.completions.pop(0)


class LookupBackend:
    """Maps known query texts to canned graph completions (label form).

    For hermetic service runs: a request whose prompt contains a known query
    gets that query's graph JSON back, for both extraction stages. Useful
    together with a fixture triple set to demo the whole stack offline.
    """

    kind = "mock_scripted"

    def __init__(self, table: dict[str, dict]):
        self.table = {
            query: serialize_label_graph(
                [(n["id"], n["class"]) for n in doc["nodes"]],
                [(e["from"], e["link"], e["to"]) for e in doc["edges"]],
            )
            for query, doc in table.items()
        }

    @staticmethod
    def from_file(path: str | Path) -> "LookupBackend":
        return LookupBackend(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, request: LmRequest) -> str:
        for query, completion in self.table.items():
            if query in request.prompt:
                return completion
        raise BackendError("no scripted completion matches the prompt")


class GrammarSamplingBackend:
    """Emits a random member of whatever grammar the request carries.

    A worst-case-but-conforming server: useful for fuzzing the pipeline's
    repair guarantees."""

    kind = "mock_scripted"

    def __init__(self, seed: int = 0, min_nodes: int = 0):
        self.rng = random.Random(seed)
        self.min_nodes = min_nodes

    def complete(self, request: LmRequest) -> str:
        grammar = request.grammar or static_schema_grammar()
        for _ in range(64):
            text = sample_string(grammar, self.rng)
            if self.min_nodes == 0:
                return text
            try:
                g, _ = graph_from_json(text)
            except Exception:  # noqa: BLE001 - sampler output is grammar-valid JSON
                continue
            if len(g.nodes) >= self.min_nodes:
                return text
        return text


def serialize_label_graph(
    nodes: list[tuple[str, str]], edges: list[tuple[str, str, str]]
) -> str:
    """Canonical compact JSON for a graph in label form (the LM wire shape)."""
    doc = {
        "nodes": [{"id": i, "class": c} for i, c in nodes],
        "edges": [{"from": t, "link": l, "to": h} for t, l, h in edges],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


@dataclass
class OracleBackend:
    """Answers every extraction with an attached ground-truth graph.

    Serializes the answer graph in label form for both stages (the labels of
    a well-retrieved candidate set always contain them), which makes full
    pipeline round trips testable without any model.
    """

    index: OntologyIndex
    answer: PrototypeGraph | None = None
    kind: str = field(default="mock_oracle", init=False)

    def bind_answer(self, answer: PrototypeGraph) -> None:
        self.answer = answer

    def complete(self, request: LmRequest) -> str:
        if self.answer is None:
            raise BackendError("oracle backend has no answer graph attached")
        if request.grammar is None:
            from .sampling import template_query

            return template_query(self.answer, self.index)
        nodes = [(n.node_id, self.index.label_of(n.class_iri)) for n in self.answer.nodes]
        edges = [
            (e.tail, self.index.label_of(e.link_iri), e.head) for e in self.answer.edges
        ]
        return serialize_label_graph(nodes, edges)


def extract_raw(
    query: str,
    backend,
    *,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    temperature: float = DEFAULT_TEMPERATURE,
    seed: int | None = DEFAULT_SEED,
    model: str = "",
) -> tuple[PrototypeGraph, int]:
    """Stage 1: unconstrained-vocabulary graph extraction.

    The completion is constrained (and re-checked) against the static schema
    grammar; class/link fields come back as free text. Returns the raw graph
    and the count of dropped dangling edges.
    """
    if not query.strip():
        raise ValueError("empty query text")
    if max_tokens < 64:
        raise ValueError("graph outputs need max_tokens >= 64")
    grammar = static_schema_grammar()
    request = LmRequest(
        prompt=STAGE_INSTRUCTION.replace("{query}", query),
        grammar=grammar,
        max_tokens=max_tokens,
        temperature=temperature,
        seed=seed,
        model=model,
    )
    completion = backend.complete(request)
    if not recognize(grammar, completion):
        raise NonConformingOutputError("stage-1 completion outside schema grammar", completion)
    return graph_from_json(completion, stage=Stage.RAW)


def extract_constrained(
    query: str,
    candidates: CandidateSet,
    backend,
    index: OntologyIndex,
    *,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    temperature: float = DEFAULT_TEMPERATURE,
    seed: int | None = DEFAULT_SEED,
    model: str = "",
) -> tuple[PrototypeGraph, int]:
    """Stage 2: same instruction as stage 1, vocabulary-constrained grammar.

    Emitted labels are mapped back to iris in candidate order; node ids are
    reassigned to class-label handles. A label outside the candidate set
    means the server ignored the grammar.
    """
    from .grammar import constrained_grammar

    if not query.strip():
        raise ValueError("empty query text")
    if not candidates.classes:
        raise ValueError("candidate class set is empty")
    if max_tokens < 64:
        raise ValueError("graph outputs need max_tokens >= 64")
    grammar = constrained_grammar(candidates, index)
    request = LmRequest(
        prompt=STAGE_INSTRUCTION.replace("{query}", query),
        grammar=grammar,
        max_tokens=max_tokens,
        temperature=temperature,
        seed=seed,
        model=model,
    )
    completion = backend.complete(request)
    if not recognize(grammar, completion):
        raise NonConformingOutputError("stage-2 completion outside constrained grammar", completion)
    labeled, dropped = graph_from_json(completion, stage=Stage.CONSTRAINED)

    class_by_label = _first_by_label(candidates.class_iris(), index)
    link_by_label = _first_by_label(candidates.link_iris(), index)
    nodes = []
    for node in labeled.nodes:
        iri = class_by_label.get(node.class_iri)
        if iri is None:
            raise NonConformingOutputError(
                f"class label {node.class_iri!r} not in candidate vocabulary", completion
            )
        nodes.append(GraphNode(node.node_id, iri))
    edges = []
    for edge in labeled.edges:
        iri = link_by_label.get(edge.link_iri)
        if iri is None:
            raise NonConformingOutputError(
                f"link label {edge.link_iri!r} not in candidate vocabulary", completion
            )
        edges.append(GraphEdge(edge.tail, iri, edge.head))
    resolved = PrototypeGraph(tuple(nodes), tuple(edges), Stage.CONSTRAINED)
    return assign_variable_names(resolved, index), dropped


def _first_by_label(iris: list[str], index: OntologyIndex) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for iri in iris:
        mapping.setdefault(index.label_of(iri), iri)
    return mapping


def render_graph_text(g: PrototypeGraph) -> str:
    """Textual pattern representation fed to the query-generation prompt:
    one "node id: Class" line per node, one "edge: tail --link--> head"
    line per edge, class/link shown by iri local name."""
    lines = [f"node {n.node_id}: {local_name(n.class_iri)}" for n in g.nodes]
    lines += [
        f"edge: {e.tail} --{local_name(e.link_iri)}--> {e.head}" for e in g.edges
    ]
    return "\n".join(lines)


def generate_query_text(
    g: PrototypeGraph,
    backend,
    *,
    max_tokens: int = 256,
    temperature: float = DEFAULT_TEMPERATURE,
    seed: int | None = DEFAULT_SEED,
    model: str = "",
) -> str:
    """One-shot NL query generation from a sampled graph."""
    request = LmRequest(
        prompt=QUERY_ONESHOT.replace("{graph}", render_graph_text(g)),
        grammar=None,
        max_tokens=max_tokens,
        temperature=temperature,
        seed=seed,
        model=model,
    )
    return backend.complete(request).strip()
