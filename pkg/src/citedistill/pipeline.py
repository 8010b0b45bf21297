"""Two-pass orchestration: publications build the id map, relations become edges.

Pass 1 streams publication parts, flattening rows into a temp table and
assigning dense node ids in deterministic part order. Pass 2 streams
relation parts, translating Cites relations through the finalized map and
writing the edge list. A final pass splices the in-degree column into the
publication tables. Peak memory is O(nodes): edges are never held, and
duplicate accounting spills sorted runs to disk.

Workers may parse parts in parallel; every part's output is buffered in a
per-part temp file and merged in part order, so any --threads value
produces identical bytes.
"""

from __future__ import annotations

import csv
import os
import sys
import tempfile
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .emit import (
    FORMAT_MINIMAL,
    FORMAT_WITH_CITATIONS,
    format_row,
    write_citations,
    write_publications,
    write_publications_large,
    write_report,
)
from .idmap import IdMap
from .ingest import (
    LayoutConfig,
    enumerate_dump,
    parse_publication,
    parse_relation,
    stream_lines,
)
from .model import (
    LARGE_COLUMNS,
    NOT_CITES,
    OPTIONAL_COLUMNS,
    CorruptCompressionError,
    PublicationRecord,
    RunReport,
    Skip,
)
from .translate import DanglingSide, DuplicateCounter, translate_edge
from .validate import (
    CITATIONS_FILE,
    IDMAP_FILE,
    PUBLICATIONS_FILE,
    PUBLICATIONS_LARGE_FILE,
    REPORT_FILE,
    Violation,
    run_validate,
)

TMPDIR_ENV = "CITEDISTILL_TMPDIR"

_EDGE_BUFFER = 1 << 16


@dataclass
class DistillOptions:
    """Behavior switches for one distillation run."""

    dedup_edges: bool = False
    headers: bool = False
    publications_format: str = FORMAT_MINIMAL
    threads: int = 1
    skip_large: bool = False
    figures: bool = True
    completeness_threshold: float = 0.0
    layout: LayoutConfig = LayoutConfig()
    tmp_dir: str | Path | None = None
    progress: Callable[[str], None] | None = None
    duplicate_chunk_size: int = 1_000_000


@dataclass
class DistillResult:
    report: RunReport
    violations: list[Violation]
    output_dir: Path

    @property
    def ok(self) -> bool:
        return not self.violations


def distill(
    input_root: str | Path, output_dir: str | Path, options: DistillOptions | None = None
) -> DistillResult:
    """Run the full pipeline and validate the finished outputs.

    Files are written to a temp directory and moved into ``output_dir``
    only once every output is complete, so a crashed run never leaves a
    partial file behind. The temp directory defaults to ``output_dir``
    (same filesystem, atomic rename) and can be overridden with the
    CITEDISTILL_TMPDIR environment variable.
    """
    options = options or DistillOptions()
    if options.threads < 1:
        raise ValueError("threads must be at least 1")
    if options.publications_format not in (FORMAT_MINIMAL, FORMAT_WITH_CITATIONS):
        raise ValueError(f"unknown publications format {options.publications_format!r}")

    layout = enumerate_dump(input_root, options.layout)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    tmp_base = options.tmp_dir or os.environ.get(TMPDIR_ENV) or output_dir

    report = RunReport(
        settings={
            "dedupEdges": options.dedup_edges,
            "headers": options.headers,
            "publicationsFormat": options.publications_format,
            "skipLarge": options.skip_large,
        }
    )

    with tempfile.TemporaryDirectory(prefix=".distill-", dir=tmp_base) as tmp_name:
        tmp = Path(tmp_name)

        table_path = tmp / "publication_fields.csv"
        idmap = _pass_publications(layout.publication_parts, table_path, tmp, report, options)
        idmap.finalize()

        bytes_idmap = idmap.persist(tmp / IDMAP_FILE)

        degrees, bytes_citations = _pass_relations(
            layout.relation_parts, idmap, tmp, report, options
        )

        bytes_pub = write_publications(
            _publication_records(table_path, degrees),
            tmp / PUBLICATIONS_FILE,
            fmt=options.publications_format,
            header=options.headers,
        )
        produced = [CITATIONS_FILE, PUBLICATIONS_FILE, IDMAP_FILE, REPORT_FILE]
        report.bytes_out_by_file = {
            CITATIONS_FILE: bytes_citations,
            PUBLICATIONS_FILE: bytes_pub,
            IDMAP_FILE: bytes_idmap,
        }
        if not options.skip_large:
            report.bytes_out_by_file[PUBLICATIONS_LARGE_FILE] = write_publications_large(
                _publication_records(table_path, degrees), tmp / PUBLICATIONS_LARGE_FILE
            )
            produced.append(PUBLICATIONS_LARGE_FILE)
        os.unlink(table_path)
        report.bytes_out = sum(report.bytes_out_by_file.values())

        write_report(report, tmp / REPORT_FILE)

        figure_files: list[str] = []
        if options.figures:
            from .figures import render_report_figures

            figure_files = [
                path.name for path in render_report_figures(report, degrees, tmp / "figures")
            ]

        _promote(tmp, output_dir, produced, figure_files)

    violations = run_validate(output_dir, options.completeness_threshold)
    return DistillResult(report=report, violations=violations, output_dir=output_dir)


def _run_parts(parts, worker, threads: int) -> list:
    if threads <= 1 or len(parts) <= 1:
        return [worker(index, part) for index, part in enumerate(parts)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(len(parts)), parts))


def _progress(options: DistillOptions, message: str) -> None:
    if options.progress is not None:
        options.progress(message)


# ---------------------------------------------------------------------------
# pass 1: publications


@dataclass
class _PubPartOutcome:
    fragments: Path
    seen: int = 0
    skipped: int = 0
    bytes_compressed: int = 0
    bytes_uncompressed: int = 0
    error: str | None = None


def _pass_publications(parts, table_path: Path, tmp: Path, report: RunReport, options) -> IdMap:
    total = len(parts)

    def worker(index: int, part: Path) -> _PubPartOutcome:
        _progress(options, f"publications {index + 1}/{total} {part.name}")
        outcome = _PubPartOutcome(fragments=tmp / f"pubfrag-{index:05d}.csv")
        outcome.bytes_compressed = part.stat().st_size
        with open(outcome.fragments, "w", encoding="utf-8", newline="") as handle:
            try:
                for _, raw in stream_lines(part):
                    outcome.seen += 1
                    outcome.bytes_uncompressed += len(raw)
                    parsed = parse_publication(raw)
                    if isinstance(parsed, Skip):
                        outcome.skipped += 1
                        continue
                    handle.write(
                        format_row(
                            (
                                parsed.openaire_id,
                                parsed.doi,
                                parsed.title,
                                parsed.authors,
                                parsed.description,
                                parsed.date,
                                parsed.container,
                                parsed.language,
                            )
                        )
                    )
            except CorruptCompressionError as exc:
                outcome.error = str(exc)
        return outcome

    outcomes = _run_parts(parts, worker, options.threads)

    idmap = IdMap()
    nulls = dict.fromkeys(LARGE_COLUMNS, 0)
    with open(table_path, "w", encoding="utf-8", newline="") as handle:
        for part, outcome in zip(parts, outcomes):
            report.publications_seen += outcome.seen
            report.publications_skipped_malformed += outcome.skipped
            _add_bytes(report, "publication", outcome)
            if outcome.error is not None:
                report.parts_failed.append(
                    {"path": str(part), "kind": "publication", "error": outcome.error}
                )
            with open(outcome.fragments, "r", encoding="utf-8", newline="") as src:
                for row in csv.reader(src):
                    if row[0] in idmap:
                        report.publications_duplicate_id += 1
                        continue
                    idmap.assign(row[0])
                    handle.write(format_row(row))
                    for column, value in zip(OPTIONAL_COLUMNS, row[1:]):
                        if value == "":
                            nulls[column] += 1
            os.unlink(outcome.fragments)

    report.publications_kept = len(idmap)
    report.per_column_null_counts = nulls
    return idmap


def _add_bytes(report: RunReport, kind: str, outcome) -> None:
    bucket = report.bytes_in_by_kind.setdefault(kind, {"compressed": 0, "uncompressed": 0})
    bucket["compressed"] += outcome.bytes_compressed
    bucket["uncompressed"] += outcome.bytes_uncompressed
    report.bytes_in_compressed += outcome.bytes_compressed
    report.bytes_in_uncompressed += outcome.bytes_uncompressed


# ---------------------------------------------------------------------------
# pass 2: relations


@dataclass
class _RelPartOutcome:
    edges: Path
    seen: int = 0
    cites: int = 0
    other: int = 0
    malformed: int = 0
    mismatch: int = 0
    dangling: dict = field(
        default_factory=lambda: {
            DanglingSide.SOURCE: 0,
            DanglingSide.TARGET: 0,
            DanglingSide.BOTH: 0,
        }
    )
    bytes_compressed: int = 0
    bytes_uncompressed: int = 0
    error: str | None = None


def _pass_relations(parts, idmap: IdMap, tmp: Path, report: RunReport, options):
    total = len(parts)

    def worker(index: int, part: Path) -> _RelPartOutcome:
        _progress(options, f"relations {index + 1}/{total} {part.name}")
        outcome = _RelPartOutcome(edges=tmp / f"edges-{index:05d}.bin")
        outcome.bytes_compressed = part.stat().st_size
        dangling = outcome.dangling
        buffer = array("q")
        with open(outcome.edges, "wb") as handle:
            try:
                for _, raw in stream_lines(part):
                    outcome.seen += 1
                    outcome.bytes_uncompressed += len(raw)
                    parsed = parse_relation(raw)
                    if parsed is NOT_CITES:
                        outcome.other += 1
                        continue
                    if isinstance(parsed, Skip):
                        outcome.malformed += 1
                        continue
                    outcome.cites += 1
                    if parsed.rel_type_type != "citation":
                        outcome.mismatch += 1
                    edge = translate_edge(parsed, idmap)
                    if isinstance(edge, DanglingSide):
                        dangling[edge] += 1
                        continue
                    buffer.append((edge[0] << 32) | edge[1])
                    if len(buffer) >= _EDGE_BUFFER:
                        buffer.tofile(handle)
                        del buffer[:]
            except CorruptCompressionError as exc:
                outcome.error = str(exc)
            buffer.tofile(handle)
        return outcome

    outcomes = _run_parts(parts, worker, options.threads)

    node_count = len(idmap)
    degrees = array("i", bytes(4 * node_count))
    duplicate_counter = None
    seen_edges: set[int] | None = None
    if options.dedup_edges:
        # Exact first-occurrence dedup keeps the whole distinct-edge set
        # in memory; duplicate *counting* without dedup stays external.
        seen_edges = set()
    else:
        duplicate_counter = DuplicateCounter(
            spill_dir=tmp, chunk_size=options.duplicate_chunk_size
        )

    def emitted() -> Iterator[tuple[int, int]]:
        for part, outcome in zip(parts, outcomes):
            report.relations_seen += outcome.seen
            report.relations_cites += outcome.cites
            report.relations_other_type += outcome.other
            report.relations_skipped_malformed += outcome.malformed
            report.relations_name_type_mismatch += outcome.mismatch
            report.edges_dangling_source += outcome.dangling[DanglingSide.SOURCE]
            report.edges_dangling_target += outcome.dangling[DanglingSide.TARGET]
            report.edges_dangling_both += outcome.dangling[DanglingSide.BOTH]
            _add_bytes(report, "relation", outcome)
            if outcome.error is not None:
                report.parts_failed.append(
                    {"path": str(part), "kind": "relation", "error": outcome.error}
                )
            for block in _read_packed(outcome.edges):
                for key in block:
                    if seen_edges is not None:
                        if key in seen_edges:
                            report.edges_duplicate += 1
                            continue
                        seen_edges.add(key)
                    else:
                        duplicate_counter.add(key >> 32, key & 0xFFFFFFFF)
                    source = key >> 32
                    target = key & 0xFFFFFFFF
                    if source == target:
                        report.edges_self_loop += 1
                    report.edges_emitted += 1
                    degrees[target] += 1
                    yield (source, target)
            os.unlink(outcome.edges)
        report.edges_dangling_dropped = (
            report.edges_dangling_source
            + report.edges_dangling_target
            + report.edges_dangling_both
        )

    try:
        bytes_citations = write_citations(
            emitted(), tmp / CITATIONS_FILE, header=options.headers
        )
        if duplicate_counter is not None:
            report.edges_duplicate = duplicate_counter.finish()
    finally:
        if duplicate_counter is not None:
            duplicate_counter.close()
    return degrees, bytes_citations


def _read_packed(path: Path) -> Iterator[array]:
    with open(path, "rb") as handle:
        while True:
            block = array("q")
            try:
                block.fromfile(handle, _EDGE_BUFFER)
            except EOFError:
                if block:
                    yield block
                return
            yield block


# ---------------------------------------------------------------------------
# pass 3: publication tables


def _publication_records(table_path: Path, degrees: array) -> Iterator[PublicationRecord]:
    with open(table_path, "r", encoding="utf-8", newline="") as handle:
        for node_id, row in enumerate(csv.reader(handle)):
            yield PublicationRecord(
                node_id=node_id,
                openaire_id=row[0],
                doi=row[1] or None,
                title=row[2] or None,
                authors=row[3] or None,
                description=row[4] or None,
                date=row[5] or None,
                container=row[6] or None,
                citations=degrees[node_id],
                language=row[7] or None,
            )


# ---------------------------------------------------------------------------
# promotion


def _promote(tmp: Path, output_dir: Path, produced: list[str], figure_files: list[str]) -> None:
    """Move finished files into place, clearing stale ones from past runs."""
    for name in (CITATIONS_FILE, PUBLICATIONS_FILE, PUBLICATIONS_LARGE_FILE, IDMAP_FILE, REPORT_FILE):
        if name in produced:
            os.replace(tmp / name, output_dir / name)
        else:
            _unlink_quiet(output_dir / name)

    figures_dir = output_dir / "figures"
    if figure_files:
        figures_dir.mkdir(exist_ok=True)
        for name in figure_files:
            os.replace(tmp / "figures" / name, figures_dir / name)
    elif figures_dir.is_dir():
        for stale in figures_dir.glob("*.png"):
            _unlink_quiet(stale)


def _unlink_quiet(path: Path) -> None:
    try:
        os.unlink(path)
    except FileNotFoundError:
        pass


def print_progress(message: str) -> None:
    """Default progress reporter: one line per part file, to stderr."""
    print(message, file=sys.stderr, flush=True)
