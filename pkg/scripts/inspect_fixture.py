#!/usr/bin/env python3
"""Print the fixture ontology's hierarchy and link table for eyeball checks.

Usage: python3 scripts/inspect_fixture.py [ontology.ttl [counts.tsv]]
"""

from __future__ import annotations

import sys
from pathlib import Path

from onset.ontology import Side, links_for, load_ontology

ROOT = Path(__file__).parent.parent


def main() -> None:
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "fixtures/dbpedia_excerpt.ttl"
    counts = Path(sys.argv[2]) if len(sys.argv) > 2 else ROOT / "fixtures/dbpedia_excerpt_counts.tsv"
    index = load_ontology(path, counts=counts if counts.exists() else None)

    print(f"{len(index.classes)} classes, {len(index.links)} links, mode={index.sampling_mode.value}\n")

    roots = [c for c in index.classes.values() if not c.parents]

    def tree(iri: str, depth: int) -> None:
        cls = index.classes[iri]
        print(f"{'  ' * depth}{cls.label}  [{cls.instance_count:,}]")
        for child in index.children_of(iri):
            tree(child, depth + 1)

    for root in sorted(roots, key=lambda c: c.iri):
        tree(root.iri, 0)

    print("\nlinks (domain -> range, by instance count):")
    ordered = sorted(index.links.values(), key=lambda l: -l.instance_count)
    for link in ordered:
        print(
            f"  {link.label:<18} {index.classes[link.from_type].label} -> "
            f"{index.classes[link.to_type].label}  [{link.instance_count:,}]"
        )

    busiest = ordered[0]
    print(f"\nbusiest link: {busiest.label}")
    print("attachable to Person (outgoing):",
          [l.label for l in links_for(busiest.from_type, Side.OUTGOING, index)][:5])


if __name__ == "__main__":
    main()
