"""Shared fixtures and independent oracles for the test suite.

The oracle helpers derive expected results from generator manifests (or
raw data) by brute force, never through the pipeline code they check.
"""

from __future__ import annotations

import gzip
import json
from collections import Counter
from pathlib import Path


def write_gzip_jsonl(path: Path, records: list) -> None:
    """Write records as a gzip JSON-lines part file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with gzip.open(path, "wt", encoding="utf-8") as handle:
        for record in records:
            if isinstance(record, str):
                handle.write(record + "\n")
            else:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def oracle_node_ids(manifest) -> dict[str, int]:
    """Dense ids implied by publication stream order: a plain counter."""
    return {pub["openaireId"]: index for index, pub in enumerate(manifest.publications)}


def oracle_edges(manifest) -> list[tuple[int, int]]:
    """Brute-force join of manifest relations against manifest publications."""
    ids = oracle_node_ids(manifest)
    return [
        (ids[source], ids[target])
        for source, target, name in manifest.relations
        if name == "Cites" and source in ids and target in ids
    ]


def oracle_degrees(edges: list[tuple[int, int]], node_count: int) -> list[int]:
    """Independent in-degree tally."""
    counts = Counter(target for _, target in edges)
    return [counts.get(node, 0) for node in range(node_count)]


def read_edges(path: Path) -> list[tuple[int, int]]:
    edges = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line == "source,target":
                continue
            left, right = line.split(",")
            edges.append((int(left), int(right)))
    return edges


def pytest_runtest_logreport(report):
    """Print one PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {outcome}", flush=True)
