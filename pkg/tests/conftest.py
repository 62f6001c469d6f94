from __future__ import annotations

from pathlib import Path

import pytest

from onset.bgp import TripleSet
from onset.graph import GraphEdge, GraphNode, PrototypeGraph, Stage
from onset.ontology import SamplingMode, load_ontology
from onset.semantic import HashEmbedder, build_index

FIXTURES = Path(__file__).parent.parent / "fixtures"
DBO = "http://dbpedia.org/ontology/"
KG = "http://example.org/kg/"

TOY_TTL = """
@prefix ex: <http://example.org/schema/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

ex:Person a owl:Class ; rdfs:label "Person" .
ex:University a owl:Class ; rdfs:label "University" .
ex:almaMater a owl:ObjectProperty ;
    rdfs:label "alma mater" ;
    rdfs:domain ex:Person ;
    rdfs:range ex:University .
"""

# four links with known counts for the sampler statistics checks
STATS_TTL = """
@prefix ex: <http://example.org/stats/> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

ex:A a owl:Class . ex:B a owl:Class . ex:C a owl:Class . ex:D a owl:Class .
ex:p a owl:ObjectProperty ; rdfs:domain ex:A ; rdfs:range ex:B .
ex:q a owl:ObjectProperty ; rdfs:domain ex:B ; rdfs:range ex:C .
ex:r a owl:ObjectProperty ; rdfs:domain ex:C ; rdfs:range ex:D .
"""

STATS_COUNTS = (
    "http://example.org/stats/p\t500\n"
    "http://example.org/stats/q\t300\n"
    "http://example.org/stats/r\t200\n"
)


def dbo_iri(name: str) -> str:
    return DBO + name


@pytest.fixture(scope="session")
def dbo_index():
    return load_ontology(
        FIXTURES / "dbpedia_excerpt.ttl", counts=FIXTURES / "dbpedia_excerpt_counts.tsv"
    )


@pytest.fixture(scope="session")
def dbo_semantic(dbo_index):
    return build_index(dbo_index, HashEmbedder())


@pytest.fixture(scope="session")
def toy_index():
    return load_ontology(TOY_TTL)


@pytest.fixture(scope="session")
def stats_index():
    return load_ontology(STATS_TTL, counts=STATS_COUNTS, sampling_mode=SamplingMode.PROBABILISTIC)


@pytest.fixture(scope="session")
def worked_graph():
    """The worked example graph: two people, a child edge, a shared
    university via two almaMater edges."""
    return PrototypeGraph(
        (
            GraphNode("person_1", dbo_iri("Person")),
            GraphNode("person_2", dbo_iri("Person")),
            GraphNode("university_1", dbo_iri("University")),
        ),
        (
            GraphEdge("person_1", dbo_iri("child"), "person_2"),
            GraphEdge("person_1", dbo_iri("almaMater"), "university_1"),
            GraphEdge("person_2", dbo_iri("almaMater"), "university_1"),
        ),
        Stage.SAMPLED,
    )


WORKED_QUERY = "a person and the child of a person have the alma mater of the same university"


@pytest.fixture(scope="session")
def family_triples():
    return TripleSet.from_file(FIXTURES / "family_triples.json")
