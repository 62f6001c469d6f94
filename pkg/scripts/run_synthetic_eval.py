#!/usr/bin/env python3
"""Run the synthetic retrieval benchmark end to end and write CSV output.

With no arguments this runs the hermetic oracle configuration (echoing
backend), which reproduces the all-ones sanity aggregate. Point it at a
real server via the config file to measure an actual model:

    python3 scripts/run_synthetic_eval.py --config my_server.yaml \
        --k-values 2,3 --queries-per-k 32 --outdir results/
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from onset.benchmark import BenchmarkConfig, run_benchmark
from onset.config import load_config, load_indices, make_backend
from onset.lm import OracleBackend

ROOT = Path(__file__).parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "fixtures/service_mock.yaml"))
    parser.add_argument("--ontology", default=None)
    parser.add_argument("--k-values", default="2,3,5,7")
    parser.add_argument("--queries-per-k", type=int, default=128)
    parser.add_argument("--origin", choices=["templated", "lm"], default="templated")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--oracle", action="store_true", default=False,
                        help="use the echoing oracle instead of the configured LM")
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()

    cfg = load_config(args.config)
    indices = load_indices(cfg)
    name = args.ontology or next(iter(indices))
    loaded = indices[name]
    backend = OracleBackend(loaded.index) if args.oracle else make_backend(cfg)

    bench = BenchmarkConfig(
        k_values=tuple(int(v) for v in args.k_values.split(",")),
        queries_per_k=args.queries_per_k,
        query_origin=args.origin,
        seed=args.seed,
        retrieval_k=cfg.retrieval_k,
    )
    report = run_benchmark(
        loaded.index, loaded.sidx, backend, bench,
        model=("oracle" if args.oracle else cfg.lm_model or cfg.lm_kind),
        ontology_id=name,
    )

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2))
    (outdir / "records.csv").write_text(report.records_csv())
    (outdir / "aggregates.csv").write_text(report.aggregates_csv())
    print(report.to_text())
    print(f"\nwrote {outdir}/report.json, records.csv, aggregates.csv")


if __name__ == "__main__":
    main()
