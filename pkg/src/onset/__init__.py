"""Ontology-constrained natural-language graph querying.

Converts NL queries into schema-valid prototype graphs via two-stage
grammar-constrained LM generation, compiles them to SPARQL, and ships a
synthetic evaluation pipeline (graph sampling, query generation, F1 and
normalized-GED scoring) plus an HTTP service backing a visual editor.
"""

from .graph import (
    GraphEdge,
    GraphNode,
    PrototypeGraph,
    Stage,
    ValidationReport,
    ViolationKind,
    correct_graph,
    graph_from_json,
    to_sparql,
    validate_graph,
)
from .grammar import GrammarSpec, constrained_grammar, recognize, static_schema_grammar
from .ontology import (
    ClassDef,
    LinkDef,
    OntologyIndex,
    SamplingMode,
    Side,
    describe,
    links_for,
    load_ontology,
    subtypeof,
)
from .pipeline import PipelineTrace, run_pipeline
from .sampling import SamplerConfig, downgrade_node, sample_graph, template_query
from .scoring import f1_node, f1_rel, f1_sets, ged_distance, ged_score
from .semantic import (
    CandidateSet,
    HashEmbedder,
    HttpEmbedder,
    SemanticIndex,
    build_index,
    candidates_for_graph,
    top_k,
)

__version__ = "0.1.0"
