"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Every expected value is either a frozen golden byte string or derived by
an independent brute-force oracle (manifest joins, Counter tallies, plain
hashes) — never by the code path under test.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
import re
import shutil
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path
from types import SimpleNamespace

import pytest

from citedistill.emit import write_citations, write_publications
from citedistill.ingest import parse_relation
from citedistill.model import PublicationRecord
from citedistill.pipeline import DistillOptions, distill
from citedistill.synthgen import SynthConfig, generate
from citedistill.translate import translate_edge
from citedistill.validate import run_validate, verify_counts

from conftest import oracle_degrees, oracle_edges, oracle_node_ids, read_edges

MEMORY_CEILING = 256 * 1024 * 1024  # bytes of resident memory allowed at full stream scale

GOLDEN_RELATION = {
    "provenance": {"provenance": "Inferred by OpenAIRE", "trust": "0.9"},
    "relType": {"name": "Cites", "type": "citation"},
    "source": "doi_________::7e8d84fc096936557defb78d22cca97c",
    "sourceType": "product",
    "target": "dedup_wf_002::27d83ddfd6e54378d88445aa793d5cb8",
    "targetType": "product",
    "validated": False,
}

QUIET = dict(figures=False)


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# 1. golden edge reduction


def test_01_golden_edge_reduction():
    started = time.monotonic()
    raw = json.dumps(GOLDEN_RELATION).encode()
    rel = parse_relation(raw)
    table = SimpleNamespace(
        lookup={
            "doi_________::7e8d84fc096936557defb78d22cca97c": 159486578,
            "dedup_wf_002::27d83ddfd6e54378d88445aa793d5cb8": 118392581,
        }.get
    )
    edge = translate_edge(rel, table)
    sink = io.BytesIO()
    write_citations([edge], sink)
    assert sink.getvalue() == b"159486578,118392581\n"
    assert time.monotonic() - started < 1.0


# ---------------------------------------------------------------------------
# 2. golden publication row


def test_02_golden_publication_row():
    record = PublicationRecord(
        node_id=14209, openaire_id="od______1234::" + "0" * 32, doi="10.3931/e-rara-45685"
    )
    sink = io.BytesIO()
    write_publications([record], sink, fmt="minimal")
    assert sink.getvalue() == b"14209,10.3931/e-rara-45685\n"


# ---------------------------------------------------------------------------
# 3 + 4. oracle equivalence and in-degree correctness over random corpora


@pytest.fixture(scope="module")
def oracle_runs(tmp_path_factory):
    """Distill >= 20 random corpora; keep per-run comparison summaries."""
    rng = random.Random(20260810)
    configs = [
        SynthConfig(  # one run near full test scale
            seed=1_000_001,
            n_publications=100_000,
            n_relations=500_000,
            cites_fraction=0.7,
            dangling_fraction=0.10,
            duplicate_fraction=0.03,
            parts_per_folder=4,
            relation_parts_per_folder=6,
        )
    ]
    for index in range(19):
        configs.append(
            SynthConfig(
                seed=rng.randrange(2**32),
                n_publications=rng.randint(200, 4000),
                n_relations=rng.randint(500, 20_000),
                cites_fraction=rng.uniform(0.5, 0.9),
                dangling_fraction=rng.uniform(0.05, 0.15),
                duplicate_fraction=rng.uniform(0.01, 0.05),
                missing_field_rates={"doi": rng.uniform(0.0, 0.5)},
                parts_per_folder=rng.randint(1, 4),
            )
        )

    runs = []
    started = time.monotonic()
    for index, config in enumerate(configs):
        workdir = tmp_path_factory.mktemp(f"oracle{index:02d}")
        manifest = generate(config, workdir / "dump")
        result = distill(workdir / "dump", workdir / "out", DistillOptions(**QUIET))

        expected_edges = oracle_edges(manifest)
        emitted = read_edges(workdir / "out" / "citations.csv")

        tally = Counter(target for _, target in emitted)
        with open(workdir / "out" / "publications_large.csv", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            citations_column = [int(row[8]) for row in reader]

        runs.append(
            SimpleNamespace(
                seed=config.seed,
                n_publications=config.n_publications,
                kept=result.report.publications_kept,
                validation_ok=result.ok,
                count_violations=verify_counts(result.report),
                edges_equal=emitted == expected_edges,
                multiset_equal=Counter(emitted) == Counter(expected_edges),
                degrees_equal=citations_column
                == [tally.get(node, 0) for node in range(config.n_publications)],
            )
        )
        shutil.rmtree(workdir)
    return runs, time.monotonic() - started


def test_03_oracle_equivalence_on_random_corpora(oracle_runs):
    runs, elapsed = oracle_runs
    assert len(runs) >= 20
    for run in runs:
        assert run.multiset_equal, f"edge multiset mismatch for seed {run.seed}"
        assert run.edges_equal, f"edge order mismatch for seed {run.seed}"
        assert run.kept == run.n_publications, f"kept mismatch for seed {run.seed}"
        assert run.count_violations == [], f"conservation violated for seed {run.seed}"
        assert run.validation_ok, f"validation failed for seed {run.seed}"
    assert elapsed < 120.0, f"oracle suite took {elapsed:.1f}s"


def test_04_in_degree_matches_brute_force_tally(oracle_runs):
    runs, _ = oracle_runs
    for run in runs:
        assert run.degrees_equal, f"citations column mismatch for seed {run.seed}"


# ---------------------------------------------------------------------------
# 5. determinism across thread counts


def test_05_threads_produce_identical_bytes(tmp_path):
    config = SynthConfig(
        seed=55,
        n_publications=3000,
        n_relations=15000,
        dangling_fraction=0.08,
        duplicate_fraction=0.03,
        parts_per_folder=5,
    )
    generate(config, tmp_path / "dump", manifest=False)
    one = distill(tmp_path / "dump", tmp_path / "one", DistillOptions(threads=1, **QUIET))
    eight = distill(tmp_path / "dump", tmp_path / "eight", DistillOptions(threads=8, **QUIET))
    assert one.ok and eight.ok
    for name in ("citations.csv", "publications.csv", "publications_large.csv", "idmap.csv", "report.json"):
        assert sha256(tmp_path / "one" / name) == sha256(tmp_path / "eight" / name), name


# ---------------------------------------------------------------------------
# 6. streaming bound: O(nodes) memory while edges dwarf the ceiling


def test_06_memory_stays_within_ceiling_at_stream_scale(tmp_path):
    config = SynthConfig(
        seed=66,
        n_publications=100_000,
        n_relations=9_800_000,  # ~2.8 GB of relation JSON at ~286 B/line
        cites_fraction=1.0,
        dangling_fraction=0.0,
        duplicate_fraction=0.0,
        parts_per_folder=4,
        relation_parts_per_folder=10,
    )
    generate(config, tmp_path / "dump", manifest=False)

    done = subprocess.run(
        [
            sys.executable, "-m", "citedistill", "distill",
            "--input", str(tmp_path / "dump"),
            "--output", str(tmp_path / "out"),
            "--no-figures", "--memory-report",
        ],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 0, done.stderr[-2000:]
    match = re.search(r"peak_rss_bytes=(\d+)", done.stderr)
    assert match, done.stderr[-2000:]
    peak = int(match.group(1))

    report = json.loads((tmp_path / "out" / "report.json").read_text())
    relation_bytes = report["bytesInByKind"]["relation"]["uncompressed"]
    assert relation_bytes >= 10 * MEMORY_CEILING, f"stream only {relation_bytes} bytes"
    assert peak <= MEMORY_CEILING, f"peak rss {peak} exceeds ceiling {MEMORY_CEILING}"
    assert report["publicationsKept"] == 100_000
    assert report["edgesEmitted"] == 9_800_000


# ---------------------------------------------------------------------------
# 7. compression accounting


def test_07_compression_accounting(tmp_path):
    config = SynthConfig(seed=77, n_publications=2000, n_relations=10000)
    generate(config, tmp_path / "dump", manifest=False)
    result = distill(tmp_path / "dump", tmp_path / "out", DistillOptions(**QUIET))
    assert result.ok
    derived = json.loads((tmp_path / "out" / "report.json").read_text())["derived"]
    assert derived["bytesPerEdge"] <= 25.0
    assert derived["relationJsonToEdgeRowRatio"] >= 10.0
    assert derived["compressionRatio"] > 1.0


# ---------------------------------------------------------------------------
# 8. fault detection


@pytest.fixture(scope="module")
def pristine_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("faults")
    config = SynthConfig(seed=88, n_publications=500, n_relations=1500, parts_per_folder=1)
    generate(config, root / "dump", manifest=False)
    result = distill(root / "dump", root / "out", DistillOptions(**QUIET))
    assert result.ok
    return root


def damaged_copy(root: Path, name: str) -> Path:
    copy = root / name
    shutil.copytree(root / "out", copy)
    return copy


def checks_of(violations) -> set[str]:
    return {violation.check for violation in violations}


def test_08a_dropped_publication_line_is_detected(pristine_run):
    out = damaged_copy(pristine_run, "fault-pub")
    path = out / "publications.csv"
    lines = path.read_text().splitlines()
    del lines[200]
    path.write_text("\n".join(lines) + "\n")
    violations = run_validate(out)
    assert "node_id_density" in checks_of(violations)


def test_08b_dropped_edge_line_is_detected(pristine_run):
    out = damaged_copy(pristine_run, "fault-edge")
    path = out / "citations.csv"
    lines = path.read_text().splitlines()
    del lines[10]
    path.write_text("\n".join(lines) + "\n")
    violations = run_validate(out)
    assert "edge_count_mismatch" in checks_of(violations)


def test_08c_corrupt_gzip_tail_is_detected(pristine_run, tmp_path):
    dump = tmp_path / "dump"
    shutil.copytree(pristine_run / "dump", dump)
    part = dump / "relation" / "part-00000.json.gz"
    part.write_bytes(part.read_bytes()[:-40])
    result = distill(dump, tmp_path / "out", DistillOptions(**QUIET))
    assert not result.ok
    assert "corrupt_parts" in checks_of(result.violations)


def test_08d_out_of_range_edge_is_detected(pristine_run):
    out = damaged_copy(pristine_run, "fault-range")
    path = out / "citations.csv"
    lines = path.read_text().splitlines()
    lines[0] = "500,0"  # node ids end at 499
    path.write_text("\n".join(lines) + "\n")
    violations = run_validate(out)
    assert "edge_endpoint_range" in checks_of(violations)


def test_08e_truncated_idmap_is_detected(pristine_run):
    out = damaged_copy(pristine_run, "fault-idmap")
    path = out / "idmap.csv"
    data = path.read_bytes()
    cut = len(data) // 2
    if data[cut - 1 : cut] == b"\n":
        cut += 3
    path.write_bytes(data[:cut])
    violations = run_validate(out)
    assert checks_of(violations) & {"idmap_format", "idmap_publications_mismatch"}


def test_08_faults_drive_nonzero_exit(pristine_run):
    out = damaged_copy(pristine_run, "fault-exit")
    path = out / "citations.csv"
    lines = path.read_text().splitlines()
    del lines[3]
    path.write_text("\n".join(lines) + "\n")
    done = subprocess.run(
        [sys.executable, "-m", "citedistill", "validate", "--output", str(out)],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 1
    assert any(json.loads(line)["check"] for line in done.stdout.splitlines())


# ---------------------------------------------------------------------------
# 9. round-trip through standard CSV semantics


def test_09_outputs_parse_back_field_identical(tmp_path):
    config = SynthConfig(
        seed=99,
        n_publications=3000,
        n_relations=9000,
        missing_field_rates={"doi": 0.3, "title": 0.1, "description": 0.2},
    )
    manifest = generate(config, tmp_path / "dump")
    titles = [pub["title"] for pub in manifest.publications if pub["title"]]
    descriptions = [pub["description"] for pub in manifest.publications if pub["description"]]
    assert any("," in text for text in titles)
    assert any('"' in text for text in titles)
    assert any("\n" in text for text in titles)
    assert any("\n" in text or "\r" in text for text in descriptions)

    result = distill(tmp_path / "dump", tmp_path / "out", DistillOptions(**QUIET))
    assert result.ok

    node_ids = oracle_node_ids(manifest)
    expected_edges = oracle_edges(manifest)
    degrees = oracle_degrees(expected_edges, config.n_publications)

    assert read_edges(tmp_path / "out" / "citations.csv") == expected_edges

    with open(tmp_path / "out" / "publications.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows == [
        [str(index), pub["doi"] or ""] for index, pub in enumerate(manifest.publications)
    ]

    with open(tmp_path / "out" / "idmap.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert {key: int(value) for key, value in rows[1:]} == node_ids

    with open(tmp_path / "out" / "publications_large.csv", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        for index, (row, pub) in enumerate(zip(reader, manifest.publications)):
            expected = [
                str(index),
                pub["openaireId"],
                pub["doi"] or "",
                pub["title"] or "",
                pub["authors"] or "",
                pub["description"] or "",
                pub["date"] or "",
                pub["container"] or "",
                str(degrees[index]),
                pub["language"] or "",
            ]
            assert row == expected, f"row {index} differs"
