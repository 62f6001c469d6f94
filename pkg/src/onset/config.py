"""Service and CLI configuration: a YAML file plus environment overrides.

Environment variables ONSET_LM_URL, ONSET_EMBED_URL, ONSET_SPARQL_URL and
ONSET_LISTEN override the corresponding file entries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .lm import (
    GrammarSamplingBackend,
    LlamaCppBackend,
    LookupBackend,
    OpenAiJsonBackend,
)
from .ontology import OntologyIndex, SamplingMode, load_ontology
from .semantic import HashEmbedder, HttpEmbedder, SemanticIndex, build_index


class ConfigError(ValueError):
    pass


@dataclass
class OntologySpec:
    paths: list[str]
    counts: str | None = None
    sampling_mode: str | None = None


@dataclass
class ServiceConfig:
    ontologies: dict[str, OntologySpec]
    lm_kind: str = "llama"  # llama | openai | lookup | sampler
    lm_url: str = ""
    lm_model: str = ""
    lm_table: str = ""  # completions file for the lookup backend
    embed_kind: str = "hash"  # hash | http
    embed_url: str = ""
    embed_model: str = "hash-embedder-v1"
    retrieval_k: int = 8
    sparql_endpoint: str = ""
    fixture_triples: str = ""
    listen: str = "127.0.0.1:8321"
    seed: int = 1234
    cache_dir: str = ""
    cors_origins: list[str] = field(default_factory=lambda: ["*"])

    @property
    def listen_host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def listen_port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_config(path: str | Path) -> ServiceConfig:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    base = Path(path).parent

    raw_ontos = doc.get("ontologies") or {}
    if not raw_ontos:
        raise ConfigError("configuration must declare at least one ontology")
    ontologies = {}
    for name, entry in raw_ontos.items():
        raw_paths = entry["path"] if isinstance(entry["path"], list) else [entry["path"]]
        ontologies[name] = OntologySpec(
            paths=[str(base / p) for p in raw_paths],
            counts=str(base / entry["counts"]) if entry.get("counts") else None,
            sampling_mode=entry.get("sampling_mode"),
        )

    lm_doc = doc.get("lm") or {}
    embed_doc = doc.get("embedding") or {}
    cfg = ServiceConfig(
        ontologies=ontologies,
        lm_kind=lm_doc.get("kind", "llama"),
        lm_url=lm_doc.get("url", ""),
        lm_model=lm_doc.get("model", ""),
        lm_table=str(base / lm_doc["table"]) if lm_doc.get("table") else "",
        embed_kind=embed_doc.get("kind", "hash"),
        embed_url=embed_doc.get("url", ""),
        embed_model=embed_doc.get("model", "hash-embedder-v1"),
        retrieval_k=int(doc.get("retrieval_k", 8)),
        sparql_endpoint=doc.get("sparql_endpoint") or "",
        fixture_triples=str(base / doc["fixture_triples"]) if doc.get("fixture_triples") else "",
        listen=doc.get("listen", "127.0.0.1:8321"),
        seed=int(doc.get("seed", 1234)),
        cache_dir=str(base / doc["cache_dir"]) if doc.get("cache_dir") else "",
        cors_origins=list(doc.get("cors_origins", ["*"])),
    )
    return apply_env_overrides(cfg)


def apply_env_overrides(cfg: ServiceConfig) -> ServiceConfig:
    cfg.lm_url = os.environ.get("ONSET_LM_URL", cfg.lm_url)
    cfg.embed_url = os.environ.get("ONSET_EMBED_URL", cfg.embed_url)
    cfg.sparql_endpoint = os.environ.get("ONSET_SPARQL_URL", cfg.sparql_endpoint)
    cfg.listen = os.environ.get("ONSET_LISTEN", cfg.listen)
    return cfg


def make_backend(cfg: ServiceConfig):
    if cfg.lm_kind == "llama":
        if not cfg.lm_url:
            raise ConfigError("lm.kind 'llama' requires lm.url (or ONSET_LM_URL)")
        return LlamaCppBackend(cfg.lm_url, model=cfg.lm_model)
    if cfg.lm_kind == "openai":
        if not cfg.lm_url:
            raise ConfigError("lm.kind 'openai' requires lm.url (or ONSET_LM_URL)")
        return OpenAiJsonBackend(cfg.lm_url, model=cfg.lm_model)
    if cfg.lm_kind == "lookup":
        if not cfg.lm_table:
            raise ConfigError("lm.kind 'lookup' requires lm.table")
        return LookupBackend.from_file(cfg.lm_table)
    if cfg.lm_kind == "sampler":
        return GrammarSamplingBackend(seed=cfg.seed, min_nodes=1)
    raise ConfigError(f"unknown lm.kind {cfg.lm_kind!r}")


def make_embedder(cfg: ServiceConfig):
    if cfg.embed_kind == "hash":
        return HashEmbedder(model_id=cfg.embed_model)
    if cfg.embed_kind == "http":
        if not cfg.embed_url:
            raise ConfigError("embedding.kind 'http' requires embedding.url (or ONSET_EMBED_URL)")
        return HttpEmbedder(cfg.embed_url, model_id=cfg.embed_model)
    raise ConfigError(f"unknown embedding.kind {cfg.embed_kind!r}")


@dataclass
class LoadedOntology:
    index: OntologyIndex
    sidx: SemanticIndex


def load_indices(cfg: ServiceConfig) -> dict[str, LoadedOntology]:
    """Load every configured ontology and build its semantic index."""
    embedder = make_embedder(cfg)
    out: dict[str, LoadedOntology] = {}
    for name, spec in cfg.ontologies.items():
        mode = SamplingMode(spec.sampling_mode) if spec.sampling_mode else None
        # ontologies may span several documents; Turtle concatenates cleanly
        text = "\n".join(Path(p).read_text(encoding="utf-8") for p in spec.paths)
        index = load_ontology(
            text,
            counts=Path(spec.counts) if spec.counts else None,
            sampling_mode=mode,
        )
        sidx = build_index(index, embedder, cache_dir=cfg.cache_dir or None)
        out[name] = LoadedOntology(index=index, sidx=sidx)
    return out
