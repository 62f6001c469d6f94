#!/usr/bin/env python3
"""Walk one query through every pipeline stage and print the intermediates.

Runs hermetically against the scripted mock configuration by default; pass
--config with a real server to see live extractions.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from onset.config import load_config, load_indices, make_backend
from onset.graph import to_sparql
from onset.pipeline import run_pipeline

ROOT = Path(__file__).parent.parent
DEFAULT_QUERY = "a person and the child of a person have the alma mater of the same university"


def show_graph(title: str, doc: dict) -> None:
    print(f"--- {title} ---")
    for node in doc["nodes"]:
        label = node.get("label") or node["class"]
        print(f"  node {node['id']}: {label}")
    for edge in doc["edges"]:
        label = edge.get("label") or edge["link"]
        print(f"  edge {edge['from']} --{label}--> {edge['to']}")
    print()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("query", nargs="?", default=DEFAULT_QUERY)
    parser.add_argument("--config", default=str(ROOT / "fixtures/service_mock.yaml"))
    parser.add_argument("--ontology", default=None)
    args = parser.parse_args()

    cfg = load_config(args.config)
    indices = load_indices(cfg)
    name = args.ontology or next(iter(indices))
    loaded = indices[name]
    backend = make_backend(cfg)

    print(f"query: {args.query!r}\n")
    trace = run_pipeline(args.query, loaded.index, loaded.sidx, backend, k=cfg.retrieval_k)
    doc = trace.to_json_dict(loaded.index)

    show_graph("stage 1: open-vocabulary graph", doc["raw_graph"])
    print("--- stage 2: retrieved candidates ---")
    for item in doc["candidate_set"]["classes"][:8]:
        print(f"  class {item['label']:<24} {item['similarity']:.3f}")
    for item in doc["candidate_set"]["links"][:8]:
        print(f"  link  {item['label']:<24} {item['similarity']:.3f}")
    print()
    show_graph("stage 3: vocabulary-constrained graph", doc["constrained_graph"])
    if doc["corrections"]["edges"]:
        print("corrections applied:", doc["corrections"]["edges"])
    show_graph("stage 4: corrected graph", doc["corrected_graph"])

    if trace.status == "ok":
        print(to_sparql(trace.corrected_graph))
    else:
        print("no graph found")


if __name__ == "__main__":
    main()
