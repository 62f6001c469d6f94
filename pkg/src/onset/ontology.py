"""Ontology schema index: classes, typed links, hierarchy, instance counts.

Ingests Turtle or N-Triples schema documents plus an optional two-column
instance-count table and builds an immutable index that answers subtype and
link-endpoint queries. No OWL reasoning; domains and ranges are plain IRIs
and the subclass relation is a DAG.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .rdf import Iri, Literal, RdfParseError, parse_rdf

logger = logging.getLogger(__name__)

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDF_PROPERTY = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"

CLASS_TYPES = {OWL + "Class", RDFS + "Class"}
LINK_TYPES = {OWL + "ObjectProperty", RDF_PROPERTY}
DATATYPE_PROPERTY = OWL + "DatatypeProperty"
SUBCLASS_OF = RDFS + "subClassOf"
DOMAIN = RDFS + "domain"
RANGE = RDFS + "range"
LABEL = RDFS + "label"
COMMENT = RDFS + "comment"

DESCRIBE_SEP = " — "


class OntologyError(ValueError):
    """Unusable ontology input (parse failure is raised as RdfParseError)."""


class UnknownIriError(KeyError):
    """An IRI does not resolve in the index."""


class Side(str, Enum):
    OUTGOING = "outgoing"
    INCOMING = "incoming"


class SamplingMode(str, Enum):
    PROBABILISTIC = "probabilistic"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ClassDef:
    iri: str
    label: str
    description: str = ""
    parents: frozenset[str] = frozenset()
    instance_count: int = 0


@dataclass(frozen=True)
class LinkDef:
    iri: str
    label: str
    from_type: str
    to_type: str
    description: str = ""
    instance_count: int = 0


@dataclass
class LoadReport:
    """Diagnostics from one load: what was dropped or repaired."""

    dropped_links: list[tuple[str, str]] = field(default_factory=list)
    extra_endpoints: list[tuple[str, str, str]] = field(default_factory=list)
    broken_cycles: list[tuple[str, str]] = field(default_factory=list)

    @property
    def dropped_link_count(self) -> int:
        return len(self.dropped_links)


@dataclass(frozen=True)
class OntologyIndex:
    """Immutable snapshot of an ontology schema.

    Safe to share across threads; all derived structures (ancestor closure,
    per-class link lists) are precomputed at load time.
    """

    classes: dict[str, ClassDef]
    links: dict[str, LinkDef]
    sampling_mode: SamplingMode
    load_report: LoadReport
    _ancestors: dict[str, frozenset[str]]
    _children: dict[str, tuple[str, ...]]
    _outgoing: dict[str, tuple[str, ...]]
    _incoming: dict[str, tuple[str, ...]]

    def children_of(self, iri: str) -> tuple[str, ...]:
        """Direct subtypes, sorted by iri."""
        self.require_class(iri)
        return self._children[iri]

    def require_class(self, iri: str) -> ClassDef:
        try:
            return self.classes[iri]
        except KeyError:
            raise UnknownIriError(f"unknown class iri: {iri}") from None

    def require_link(self, iri: str) -> LinkDef:
        try:
            return self.links[iri]
        except KeyError:
            raise UnknownIriError(f"unknown link iri: {iri}") from None

    def label_of(self, iri: str) -> str:
        if iri in self.classes:
            return self.classes[iri].label
        if iri in self.links:
            return self.links[iri].label
        raise UnknownIriError(f"unknown iri: {iri}")


def local_name(iri: str) -> str:
    """Fragment after '#', else the last path segment."""
    if "#" in iri:
        return iri.rsplit("#", 1)[1]
    return iri.rstrip("/").rsplit("/", 1)[-1]


def load_counts(text: str) -> dict[str, int]:
    """Parse an 'iri<TAB>count' table; blank lines and '#' comments ignored."""
    counts: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            iri, raw = line.split("\t")
            value = int(raw)
        except ValueError:
            raise OntologyError(f"count table line {lineno}: expected 'iri<TAB>count'") from None
        if value < 0:
            raise OntologyError(f"count table line {lineno}: negative count")
        counts[iri.strip()] = value
    return counts


def load_ontology(
    source: str | Path,
    counts: str | Path | None = None,
    sampling_mode: SamplingMode | None = None,
) -> OntologyIndex:
    """Build an OntologyIndex from a Turtle/N-Triples document.

    ``source`` and ``counts`` are file paths or document text. Links missing
    a resolvable domain or range are dropped and reported; extra domains or
    ranges beyond the first declared pair are reported. When sampling_mode
    is not given it defaults to probabilistic if a count table is supplied,
    uniform otherwise.
    """
    text = _read(source)
    count_table = load_counts(_read(counts)) if counts is not None else {}
    if sampling_mode is None:
        sampling_mode = SamplingMode.PROBABILISTIC if count_table else SamplingMode.UNIFORM

    triples = parse_rdf(text)
    report = LoadReport()

    class_iris: set[str] = set()
    link_candidates: set[str] = set()
    datatype_props: set[str] = set()
    parents: dict[str, set[str]] = {}
    domains: dict[str, list[str]] = {}
    ranges: dict[str, list[str]] = {}
    labels: dict[str, tuple[int, str]] = {}
    comments: dict[str, tuple[int, str]] = {}

    def keep_text(store: dict[str, tuple[int, str]], subject: str, lit: Literal) -> None:
        # Preference: @en, then untagged, then any other language; first seen wins per tier.
        tier = 0 if lit.lang.startswith("en") else 1 if not lit.lang else 2
        if subject not in store or tier < store[subject][0]:
            store[subject] = (tier, lit.value)

    for subject, predicate, obj in triples:
        if predicate == RDF_TYPE and isinstance(obj, Iri):
            if obj.value in CLASS_TYPES:
                class_iris.add(subject)
            elif obj.value in LINK_TYPES:
                link_candidates.add(subject)
            elif obj.value == DATATYPE_PROPERTY:
                datatype_props.add(subject)
        elif predicate == SUBCLASS_OF and isinstance(obj, Iri):
            class_iris.add(subject)
            class_iris.add(obj.value)
            parents.setdefault(subject, set()).add(obj.value)
        elif predicate == DOMAIN and isinstance(obj, Iri):
            domains.setdefault(subject, []).append(obj.value)
        elif predicate == RANGE and isinstance(obj, Iri):
            ranges.setdefault(subject, []).append(obj.value)
        elif predicate == LABEL and isinstance(obj, Literal):
            keep_text(labels, subject, obj)
        elif predicate == COMMENT and isinstance(obj, Literal):
            keep_text(comments, subject, obj)

    if not class_iris:
        raise OntologyError("no classes declared; ontology is unusable")

    parents = _break_cycles(class_iris, parents, report)

    classes: dict[str, ClassDef] = {}
    for iri in sorted(class_iris):
        classes[iri] = ClassDef(
            iri=iri,
            label=labels.get(iri, (0, local_name(iri)))[1],
            description=comments.get(iri, (0, ""))[1],
            parents=frozenset(p for p in parents.get(iri, set()) if p in class_iris),
            instance_count=count_table.get(iri, 0),
        )

    links: dict[str, LinkDef] = {}
    for iri in sorted(link_candidates - datatype_props):
        doms = domains.get(iri, [])
        rans = ranges.get(iri, [])
        usable_doms = [d for d in doms if d in classes]
        usable_rans = [r for r in rans if r in classes]
        if not usable_doms or not usable_rans:
            report.dropped_links.append((iri, "missing or unresolvable domain/range"))
            continue
        for extra in usable_doms[1:]:
            report.extra_endpoints.append((iri, "domain", extra))
        for extra in usable_rans[1:]:
            report.extra_endpoints.append((iri, "range", extra))
        links[iri] = LinkDef(
            iri=iri,
            label=labels.get(iri, (0, local_name(iri)))[1],
            from_type=usable_doms[0],
            to_type=usable_rans[0],
            description=comments.get(iri, (0, ""))[1],
            instance_count=count_table.get(iri, 0),
        )

    for iri, reason in report.dropped_links:
        logger.warning("dropped link %s: %s", iri, reason)
    for iri, kind, extra in report.extra_endpoints:
        logger.warning("link %s: ignoring extra %s %s", iri, kind, extra)
    for child, parent in report.broken_cycles:
        logger.warning("subclass cycle broken: removed %s subClassOf %s", child, parent)

    ancestors = _ancestor_closure(classes)
    children: dict[str, list[str]] = {iri: [] for iri in classes}
    for iri, cls in classes.items():
        for parent in cls.parents:
            children[parent].append(iri)
    outgoing, incoming = _attachment_tables(classes, links, ancestors)
    return OntologyIndex(
        classes=classes,
        links=links,
        sampling_mode=sampling_mode,
        load_report=report,
        _ancestors=ancestors,
        _children={iri: tuple(sorted(kids)) for iri, kids in children.items()},
        _outgoing=outgoing,
        _incoming=incoming,
    )


def _read(source: str | Path) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    try:
        is_file = "\n" not in source and Path(source).exists()
    except (OSError, ValueError):
        is_file = False
    if is_file:
        return Path(source).read_text(encoding="utf-8")
    return source


def _break_cycles(
    class_iris: set[str],
    parents: dict[str, set[str]],
    report: LoadReport,
) -> dict[str, set[str]]:
    """Drop parent edges that close a cycle, deterministically (sorted DFS)."""
    state: dict[str, int] = {}  # 0 visiting, 1 done
    kept: dict[str, set[str]] = {iri: set() for iri in class_iris}

    def visit(node: str) -> None:
        state[node] = 0
        for parent in sorted(parents.get(node, set())):
            if parent not in class_iris:
                continue
            if state.get(parent) == 0:
                report.broken_cycles.append((node, parent))
                continue
            kept[node].add(parent)
            if parent not in state:
                visit(parent)
        state[node] = 1

    for iri in sorted(class_iris):
        if iri not in state:
            visit(iri)
    return kept


def _ancestor_closure(classes: dict[str, ClassDef]) -> dict[str, frozenset[str]]:
    closure: dict[str, frozenset[str]] = {}

    def ancestors_of(iri: str) -> frozenset[str]:
        if iri in closure:
            return closure[iri]
        acc: set[str] = {iri}
        for parent in classes[iri].parents:
            acc |= ancestors_of(parent)
        closure[iri] = frozenset(acc)
        return closure[iri]

    for iri in classes:
        ancestors_of(iri)
    return closure


def _attachment_tables(
    classes: dict[str, ClassDef],
    links: dict[str, LinkDef],
    ancestors: dict[str, frozenset[str]],
) -> tuple[dict[str, tuple[str, ...]], dict[str, tuple[str, ...]]]:
    ordered = sorted(links.values(), key=lambda l: (-l.instance_count, l.iri))
    outgoing: dict[str, tuple[str, ...]] = {}
    incoming: dict[str, tuple[str, ...]] = {}
    for iri in classes:
        anc = ancestors[iri]
        outgoing[iri] = tuple(l.iri for l in ordered if l.from_type in anc)
        incoming[iri] = tuple(l.iri for l in ordered if l.to_type in anc)
    return outgoing, incoming


def subtypeof(candidate: str, ancestor: str, index: OntologyIndex) -> bool:
    """True iff candidate equals ancestor or reaches it through parents."""
    index.require_class(candidate)
    index.require_class(ancestor)
    return ancestor in index._ancestors[candidate]


def links_for(node_class: str, side: Side, index: OntologyIndex) -> list[LinkDef]:
    """Links attachable to node_class on the given side, busiest first.

    Outgoing links are those whose domain is a supertype of node_class;
    incoming dually for the range. Ordered by descending instance count,
    ties by iri.
    """
    index.require_class(node_class)
    table = index._outgoing if side == Side.OUTGOING else index._incoming
    return [index.links[iri] for iri in table[node_class]]


def describe(iri: str, index: OntologyIndex) -> str:
    """Embedding-input text for a class or link.

    "{label} — {description}" for classes; links append
    "from {domain label} to {range label}". Empty segments are elided.
    """
    if iri in index.classes:
        cls = index.classes[iri]
        parts = [cls.label]
        if cls.description:
            parts.append(cls.description)
        return DESCRIBE_SEP.join(parts)
    link = index.require_link(iri)
    parts = [link.label]
    if link.description:
        parts.append(link.description)
    parts.append(
        f"from {index.classes[link.from_type].label} to {index.classes[link.to_type].label}"
    )
    return DESCRIBE_SEP.join(parts)


__all__ = [
    "ClassDef",
    "LinkDef",
    "LoadReport",
    "OntologyError",
    "OntologyIndex",
    "RdfParseError",
    "SamplingMode",
    "Side",
    "UnknownIriError",
    "describe",
    "links_for",
    "load_counts",
    "load_ontology",
    "local_name",
    "subtypeof",
]
