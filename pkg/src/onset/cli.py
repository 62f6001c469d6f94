"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 backend (LM/embedding/SPARQL
endpoint) failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .benchmark import BenchmarkConfig, ScoreReport, QueryRecord, run_benchmark
from .config import ConfigError, load_config, load_indices, make_backend
from .graph import graph_from_json_dict, graph_to_json_dict, to_sparql
from .lm import BackendError, OracleBackend, generate_query_text
from .pipeline import PipelineStageError, run_pipeline
from .sampling import SamplerConfig, sample_graph, template_query
from .scoring import f1_node, f1_rel, ged_score
from .semantic import EmbeddingError


@click.group()
def cli() -> None:
    """Ontology-constrained NL query engine."""


def _load(config_path: str, ontology: str | None):
    cfg = load_config(config_path)
    indices = load_indices(cfg)
    if ontology is None:
        if len(indices) == 1:
            ontology = next(iter(indices))
        else:
            raise click.UsageError("multiple ontologies configured; pass --ontology")
    if ontology not in indices:
        raise click.UsageError(f"unknown ontology {ontology!r}")
    return cfg, ontology, indices[ontology]


@cli.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
def serve(config: str) -> None:
    """Run the HTTP query service."""
    import uvicorn

    from .service import create_app

    cfg = load_config(config)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port)


@cli.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
@click.option("--ontology", default=None)
@click.option("--k", default=None, type=int, help="candidate retrieval width")
@click.argument("query")
def extract(config: str, ontology: str | None, k: int | None, query: str) -> None:
    """One-shot extraction: print the pipeline trace and the SPARQL query."""
    cfg, _, loaded = _load(config, ontology)
    backend = make_backend(cfg)
    trace = run_pipeline(query, loaded.index, loaded.sidx, backend, k=k or cfg.retrieval_k)
    click.echo(json.dumps(trace.to_json_dict(loaded.index), indent=2))
    if trace.status == "ok":
        click.echo(to_sparql(trace.corrected_graph))
    else:
        click.echo("no graph found", err=True)


@cli.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
def index(config: str) -> None:
    """Build or refresh the embedding vector caches."""
    cfg = load_config(config)
    if not cfg.cache_dir:
        raise click.UsageError("config has no cache_dir; nothing to build")
    loaded = load_indices(cfg)
    for name, entry in loaded.items():
        click.echo(f"{name}: {entry.sidx.size} vectors (dim {entry.sidx.dim})")


@cli.group()
def eval() -> None:
    """Synthetic evaluation tools."""


@eval.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
@click.option("--ontology", default=None)
@click.option("--max-nodes", default=3, type=int)
@click.option("--count", default=10, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--top-k-links", default=10, type=int)
@click.option("--depth", default=2, type=int)
def sample(config, ontology, max_nodes, count, seed, top_k_links, depth) -> None:
    """Sample prototype graphs; one JSON document per line."""
    _, _, loaded = _load(config, ontology)
    sampler = SamplerConfig(
        top_k_links=top_k_links,
        depth=depth,
        max_nodes=max_nodes,
        mode=loaded.index.sampling_mode,
        rng_seed=seed,
    )
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(max_nodes, i)))
        graph = sample_graph(loaded.index, sampler, rng)
        click.echo(json.dumps({"graph": graph_to_json_dict(graph)}))


@eval.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
@click.option("--ontology", default=None)
@click.option("--origin", type=click.Choice(["templated", "lm"]), default="templated")
@click.argument("graphs_file", type=click.Path(exists=True))
def genq(config, ontology, origin, graphs_file) -> None:
    """Turn sampled graphs (JSON lines) into NL queries."""
    cfg, _, loaded = _load(config, ontology)
    backend = make_backend(cfg) if origin == "lm" else None
    for line in Path(graphs_file).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        graph = graph_from_json_dict(doc["graph"])
        if origin == "templated":
            text = template_query(graph, loaded.index)
        else:
            if hasattr(backend, "bind_answer"):
                backend.bind_answer(graph)
            text = generate_query_text(graph, backend)
        doc["query_text"] = text
        doc["origin"] = origin
        click.echo(json.dumps(doc))


@eval.command()
@click.option("--predicted", required=True, type=click.Path(exists=True))
@click.option("--truth", required=True, type=click.Path(exists=True))
def score(predicted, truth) -> None:
    """Score two graph JSON files (predicted vs ground truth)."""
    g_pred = graph_from_json_dict(json.loads(Path(predicted).read_text(encoding="utf-8")))
    g_true = graph_from_json_dict(json.loads(Path(truth).read_text(encoding="utf-8")))
    click.echo(
        json.dumps(
            {
                "f1_node": f1_node(g_pred, g_true),
                "f1_rel": f1_rel(g_pred, g_true),
                "ged_s": ged_score(g_pred, g_true),
            },
            indent=2,
        )
    )


@eval.command()
@click.option("--config", "-c", required=True, type=click.Path(exists=True))
@click.option("--ontology", default=None)
@click.option("--k-values", default="2,3,5,7", help="comma-separated node budgets")
@click.option("--queries-per-k", default=128, type=int)
@click.option("--origin", type=click.Choice(["templated", "lm", "file"]), default="templated")
@click.option("--queries-file", type=click.Path(exists=True), default=None)
@click.option("--seed", default=0, type=int)
@click.option("--oracle", is_flag=True, help="use the echoing oracle backend instead of the configured LM")
@click.option("--out", type=click.Path(), default=None, help="write the full report JSON here")
def run(config, ontology, k_values, queries_per_k, origin, queries_file, seed, oracle, out) -> None:
    """Run the full synthetic benchmark and print the aggregate table."""
    cfg, name, loaded = _load(config, ontology)
    backend = OracleBackend(loaded.index) if oracle else make_backend(cfg)
    bench = BenchmarkConfig(
        k_values=tuple(int(v) for v in k_values.split(",")),
        queries_per_k=queries_per_k,
        query_origin=origin,
        seed=seed,
        retrieval_k=cfg.retrieval_k,
    )
    report = run_benchmark(
        loaded.index,
        loaded.sidx,
        backend,
        bench,
        queries_file=queries_file,
        model=cfg.lm_model or cfg.lm_kind,
        ontology_id=name,
    )
    if out:
        Path(out).write_text(json.dumps(report.to_json_dict(), indent=2), encoding="utf-8")
        click.echo(f"wrote {out}")
    click.echo(report.to_text())


@eval.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True),
              help="report JSON produced by 'eval run --out'")
@click.option("--csv-out", type=click.Path(), default=None)
def report(records_path, csv_out) -> None:
    """Aggregate a stored report to a table (text, optionally CSV files)."""
    doc = json.loads(Path(records_path).read_text(encoding="utf-8"))
    rebuilt = ScoreReport(records=[QueryRecord(**r) for r in doc["records"]])
    click.echo(rebuilt.to_text())
    if csv_out:
        base = Path(csv_out)
        base.with_suffix(".records.csv").write_text(rebuilt.records_csv(), encoding="utf-8")
        base.with_suffix(".aggregates.csv").write_text(rebuilt.aggregates_csv(), encoding="utf-8")
        click.echo(f"wrote {base.with_suffix('.records.csv')} and {base.with_suffix('.aggregates.csv')}")


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except (BackendError, EmbeddingError, PipelineStageError) as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(2)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
