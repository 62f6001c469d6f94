"""Semantic candidate retrieval over class and link descriptions.

Embeds every class/link description once, persists the vectors in a small
binary cache keyed by (ontology content hash, embedder model id), and
answers exact top-k cosine queries. Corpora are at most a few thousand
items, so retrieval is a dense scan.

Two embedders ship: an HTTP client for OpenAI-compatible embedding
endpoints, and a deterministic hashed bag-of-tokens embedder for hermetic
tests (identical texts map to identical vectors; token overlap yields
positive similarity).
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .ontology import DESCRIBE_SEP, OntologyIndex, describe

logger = logging.getLogger(__name__)


class EmbeddingError(RuntimeError):
    """Endpoint failure or inconsistent vector dimensions."""


class Embedder(Protocol):
    model_id: str

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass(frozen=True)
class ScoredItem:
    iri: str
    similarity: float


@dataclass(frozen=True)
class CandidateSet:
    """Restricted vocabularies for the constrained generation stage,
    sorted by descending similarity (ties by iri), without duplicates."""

    classes: tuple[ScoredItem, ...]
    links: tuple[ScoredItem, ...]

    def class_iris(self) -> list[str]:
        return [c.iri for c in self.classes]

    def link_iris(self) -> list[str]:
        return [l.iri for l in self.links]


def sanitize_text(text: str) -> str:
    """Strip unpaired surrogates (expressible via JSON \\uXXXX escapes in
    grammar-conforming LM output) so texts stay UTF-8 encodable."""
    return text.encode("utf-8", errors="replace").decode("utf-8")


class HashEmbedder:
    """Deterministic bag-of-hashed-tokens embedder for tests and offline use.

    Each lowercase alphanumeric token hashes to a fixed pseudo-random unit
    vector; a text embeds to the position-weighted sum of its token vectors
    (weight 1/(position+1), so leading tokens dominate, matching how the
    description texts lead with the label). No network, no model weights,
    stable across processes.
    """

    def __init__(self, dim: int = 384, model_id: str = "hash-embedder-v1"):
        self.dim = dim
        self.model_id = model_id
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            self._token_cache[token] = vec
        return vec

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            tokens = re.findall(r"[a-z0-9]+", text.lower())
            if not tokens:
                tokens = [text or "<empty>"]
            for position, token in enumerate(tokens):
                out[i] += self._token_vector(token) / np.sqrt(position + 1)
        return out


class HttpEmbedder:
    """OpenAI-compatible embeddings endpoint client (POST /embeddings)."""

    def __init__(
        self,
        url: str,
        model_id: str,
        batch_size: int = 64,
        timeout: float = 60.0,
        retries: int = 3,
    ):
        self.url = url
        self.model_id = model_id
        self.batch_size = batch_size
        self.timeout = timeout
        self.retries = retries

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        rows: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            payload = {"model": self.model_id, "input": batch}
            last: Exception | None = None
            for attempt in range(self.retries):
                try:
                    resp = httpx.post(self.url, json=payload, timeout=self.timeout)
                    resp.raise_for_status()
                    data = resp.json()["data"]
                    rows.extend(item["embedding"] for item in data)
                    last = None
                    break
                except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                    last = exc
                    time.sleep(0.5 * 2**attempt)
            if last is not None:
                raise EmbeddingError(f"embedding endpoint failed: {last}") from last
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise EmbeddingError(f"mixed embedding dimensions from endpoint: {sorted(lengths)}")
        return np.asarray(rows, dtype=np.float64)


@dataclass(frozen=True)
class SemanticIndex:
    ontology: OntologyIndex
    embedder: Embedder
    class_iris: tuple[str, ...]
    link_iris: tuple[str, ...]
    class_matrix: np.ndarray  # unit rows
    link_matrix: np.ndarray  # unit rows
    dim: int

    @property
    def size(self) -> int:
        return len(self.class_iris) + len(self.link_iris)


def ontology_content_hash(index: OntologyIndex) -> str:
    """Stable digest of everything that affects embedding inputs."""
    payload = {
        "classes": [
            [c.iri, c.label, c.description, sorted(c.parents)]
            for c in index.classes.values()
        ],
        "links": [
            [l.iri, l.label, l.description, l.from_type, l.to_type]
            for l in index.links.values()
        ],
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _cache_path(cache_dir: Path, onto_hash: str, model_id: str) -> Path:
    safe_model = re.sub(r"[^A-Za-z0-9_.-]", "_", model_id)
    return cache_dir / f"{onto_hash[:16]}__{safe_model}.vec"


def _write_cache(path: Path, sidx_data: dict, matrix: np.ndarray) -> None:
    header = json.dumps(sidx_data).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(header + b"\n")
        fh.write(matrix.astype("<f4").tobytes())


def _read_cache(path: Path) -> tuple[dict, np.ndarray] | None:
    try:
        with path.open("rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            raw = fh.read()
    except (OSError, ValueError):
        return None
    count = len(header["classes"]) + len(header["links"])
    matrix = np.frombuffer(raw, dtype="<f4")
    if matrix.size != count * header["dim"]:
        return None
    return header, matrix.reshape(count, header["dim"])


def build_index(
    index: OntologyIndex,
    embedder: Embedder,
    cache_dir: str | Path | None = None,
) -> SemanticIndex:
    """Embed one description per class and link; reuse the cache when the
    (ontology hash, model id) key matches so rebuilds issue no requests.

    Zero-norm vectors and mixed dimensions are rejected.
    """
    class_iris = tuple(index.classes)
    link_iris = tuple(index.links)
    onto_hash = ontology_content_hash(index)
    cache_file = (
        _cache_path(Path(cache_dir), onto_hash, embedder.model_id) if cache_dir else None
    )

    matrix: np.ndarray | None = None
    if cache_file is not None and cache_file.exists():
        cached = _read_cache(cache_file)
        if (
            cached is not None
            and cached[0]["ontology_hash"] == onto_hash
            and cached[0]["model"] == embedder.model_id
            and tuple(cached[0]["classes"]) == class_iris
            and tuple(cached[0]["links"]) == link_iris
        ):
            matrix = cached[1].astype(np.float64)
            logger.debug("semantic cache hit: %s", cache_file)

    if matrix is None:
        texts = [sanitize_text(describe(iri, index)) for iri in class_iris + link_iris]
        raw = embedder.embed(texts)
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[0] != len(texts):
            raise EmbeddingError(f"embedder returned shape {raw.shape}, expected ({len(texts)}, d)")
        # float32 round-trip so cold and warm builds see identical values
        matrix = raw.astype("<f4").astype(np.float64)
        if cache_file is not None:
            _write_cache(
                cache_file,
                {
                    "dim": matrix.shape[1],
                    "model": embedder.model_id,
                    "ontology_hash": onto_hash,
                    "classes": list(class_iris),
                    "links": list(link_iris),
                },
                matrix,
            )

    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0):
        zero_iri = (class_iris + link_iris)[int(np.argmin(norms))]
        raise EmbeddingError(f"zero-norm embedding for {zero_iri}")
    unit = matrix / norms[:, None]
    n_classes = len(class_iris)
    return SemanticIndex(
        ontology=index,
        embedder=embedder,
        class_iris=class_iris,
        link_iris=link_iris,
        class_matrix=unit[:n_classes],
        link_matrix=unit[n_classes:],
        dim=unit.shape[1] if unit.size else 0,
    )


def _embed_query(sidx: SemanticIndex, text: str) -> np.ndarray:
    vec = np.asarray(sidx.embedder.embed([sanitize_text(text)]), dtype=np.float64)[0]
    if vec.shape[0] != sidx.dim:
        raise EmbeddingError(f"query dimension {vec.shape[0]} != index dimension {sidx.dim}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise EmbeddingError("zero-norm query embedding")
    return vec / norm


def top_k(query_text: str, kind: str, k: int, sidx: SemanticIndex) -> list[ScoredItem]:
    """The k items of one kind most cosine-similar to the query text.

    kind is "classes" or "links". Returns the whole corpus when it has
    fewer than k items; deterministic tie-break by iri.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if kind == "classes":
        iris, matrix = sidx.class_iris, sidx.class_matrix
    elif kind == "links":
        iris, matrix = sidx.link_iris, sidx.link_matrix
    else:
        raise ValueError(f"kind must be 'classes' or 'links', got {kind!r}")
    if not iris:
        raise EmbeddingError(f"semantic index holds no {kind}")
    sims = matrix @ _embed_query(sidx, query_text)
    order = sorted(range(len(iris)), key=lambda i: (-sims[i], iris[i]))
    return [ScoredItem(iris[i], float(sims[i])) for i in order[:k]]


def raw_edge_query_text(link_text: str, tail_text: str, head_text: str) -> str:
    """Query text for a raw edge, shaped like a stored link description."""
    return f"{link_text}{DESCRIBE_SEP}from {tail_text} to {head_text}"


def candidates_for_graph(g, k: int, sidx: SemanticIndex) -> CandidateSet:
    """Union of per-node and per-edge top-k retrievals over a raw graph.

    Each item keeps its maximum similarity across retrievals. The domain and
    range classes of every retrieved link are added to the class candidates
    (at that link's similarity) so a grammar over the result can always type
    both endpoints of any allowed link.
    """
    from .graph import Stage

    if g.stage != Stage.RAW:
        raise ValueError(f"candidate retrieval expects a raw graph, got stage {g.stage.value}")
    class_scores: dict[str, float] = {}
    link_scores: dict[str, float] = {}

    def absorb(store: dict[str, float], items: list[ScoredItem]) -> None:
        for item in items:
            if item.iri not in store or item.similarity > store[item.iri]:
                store[item.iri] = item.similarity

    node_class = {n.node_id: n.class_iri for n in g.nodes}
    for node in g.nodes:
        absorb(class_scores, top_k(node.class_iri, "classes", k, sidx))
    for edge in g.edges:
        query = raw_edge_query_text(edge.link_iri, node_class[edge.tail], node_class[edge.head])
        absorb(link_scores, top_k(query, "links", k, sidx))

    for link_iri, score in list(link_scores.items()):
        link = sidx.ontology.links[link_iri]
        for endpoint in (link.from_type, link.to_type):
            if endpoint not in class_scores or score > class_scores[endpoint]:
                class_scores[endpoint] = score

    def ranked(store: dict[str, float]) -> tuple[ScoredItem, ...]:
        return tuple(
            ScoredItem(iri, score)
            for iri, score in sorted(store.items(), key=lambda kv: (-kv[1], kv[0]))
        )

    return CandidateSet(classes=ranked(class_scores), links=ranked(link_scores))
