"""Post-run quality control over the emitted files.

All checks read the files on disk, not pipeline memory, so they catch
emit-layer bugs and after-the-fact damage alike. Checks return violation
lists instead of raising; a clean run returns empty lists.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .idmap import IdMap
from .model import LARGE_COLUMNS, RunReport, TableFormatError

CITATIONS_FILE = "citations.csv"
PUBLICATIONS_FILE = "publications.csv"
PUBLICATIONS_LARGE_FILE = "publications_large.csv"
IDMAP_FILE = "idmap.csv"
REPORT_FILE = "report.json"


@dataclass(frozen=True)
class Violation:
    """One failed check, named so scripts can react to it."""

    check: str
    message: str

    def to_json(self) -> str:
        return json.dumps({"check": self.check, "message": self.message})


def verify_counts(report: RunReport) -> list[Violation]:
    """Check the conservation identities that prove no data loss."""
    violations = []

    kept_total = (
        report.publications_kept
        + report.publications_skipped_malformed
        + report.publications_duplicate_id
    )
    if report.publications_seen != kept_total:
        violations.append(
            Violation(
                "publication_conservation",
                f"publicationsSeen {report.publications_seen} != kept {report.publications_kept}"
                f" + skippedMalformed {report.publications_skipped_malformed}"
                f" + duplicateId {report.publications_duplicate_id}",
            )
        )

    relations_total = (
        report.relations_cites + report.relations_other_type + report.relations_skipped_malformed
    )
    if report.relations_seen != relations_total:
        violations.append(
            Violation(
                "relation_conservation",
                f"relationsSeen {report.relations_seen} != cites {report.relations_cites}"
                f" + otherType {report.relations_other_type}"
                f" + skippedMalformed {report.relations_skipped_malformed}",
            )
        )

    edges_total = report.edges_emitted + report.edges_dangling_dropped
    if report.settings.get("dedupEdges"):
        edges_total += report.edges_duplicate
    if report.relations_cites != edges_total:
        violations.append(
            Violation(
                "edge_conservation",
                f"relationsCites {report.relations_cites} != edgesEmitted {report.edges_emitted}"
                f" + danglingDropped {report.edges_dangling_dropped}"
                + (
                    f" + duplicate {report.edges_duplicate}"
                    if report.settings.get("dedupEdges")
                    else ""
                ),
            )
        )

    dangling_total = (
        report.edges_dangling_source + report.edges_dangling_target + report.edges_dangling_both
    )
    if report.edges_dangling_dropped != dangling_total:
        violations.append(
            Violation(
                "dangling_breakdown",
                f"edgesDanglingDropped {report.edges_dangling_dropped} != source"
                f" {report.edges_dangling_source} + target {report.edges_dangling_target}"
                f" + both {report.edges_dangling_both}",
            )
        )

    for part in report.parts_failed:
        violations.append(
            Violation("corrupt_parts", f"part file aborted: {part.get('path')}: {part.get('error')}")
        )
    return violations


@dataclass
class Completeness:
    """Per-column completeness of publications_large.csv."""

    total_rows: int
    ratios: dict[str, float]
    violations: list[Violation]


def verify_completeness(large_file: str | Path, threshold: float = 0.0) -> Completeness:
    """Measure nonNull/total per column, flagging columns below threshold.

    The default threshold of 0.0 makes this report-only. Raises
    ``TableFormatError`` if the file does not have the expected ten
    columns, and ``FileNotFoundError`` if it is missing.
    """
    large_file = Path(large_file)
    non_null = {column: 0 for column in LARGE_COLUMNS}
    total = 0
    with open(large_file, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(LARGE_COLUMNS):
            raise TableFormatError(f"{large_file}: unexpected header {header!r}")
        for row in reader:
            if len(row) != len(LARGE_COLUMNS):
                raise TableFormatError(
                    f"{large_file}: data row {total} has {len(row)} fields"
                )
            total += 1
            for column, value in zip(LARGE_COLUMNS, row):
                if value != "":
                    non_null[column] += 1

    ratios = {
        column: (non_null[column] / total if total else 1.0) for column in LARGE_COLUMNS
    }
    violations = [
        Violation(
            "column_completeness",
            f"column {column!r} completeness {ratio:.4f} below threshold {threshold}",
        )
        for column, ratio in ratios.items()
        if ratio < threshold
    ]
    return Completeness(total_rows=total, ratios=ratios, violations=violations)


def verify_outputs_crosscheck(
    citations: str | Path,
    publications: str | Path,
    idmap_path: str | Path,
    report: RunReport | None = None,
) -> list[Violation]:
    """Cross-check the emitted files against each other (and the report).

    Asserts the publication node ids form the dense range [0, n), the id
    map matches them, and every edge endpoint is inside that range. All
    files are streamed, so memory stays flat on full-size outputs.
    """
    violations = []

    node_count, pub_violations = _check_publications_dense(Path(publications))
    violations.extend(pub_violations)

    try:
        table = IdMap.load(idmap_path)
    except TableFormatError as exc:
        violations.append(Violation("idmap_format", str(exc)))
    else:
        if len(table) != node_count:
            violations.append(
                Violation(
                    "idmap_publications_mismatch",
                    f"idmap has {len(table)} entries but publications has {node_count} rows",
                )
            )

    edge_count, edge_violations = _check_edges(Path(citations), node_count)
    violations.extend(edge_violations)

    if report is not None:
        if node_count != report.publications_kept:
            violations.append(
                Violation(
                    "publication_count_mismatch",
                    f"publications rows {node_count} != publicationsKept"
                    f" {report.publications_kept}",
                )
            )
        if edge_count != report.edges_emitted:
            violations.append(
                Violation(
                    "edge_count_mismatch",
                    f"citations rows {edge_count} != edgesEmitted {report.edges_emitted}",
                )
            )
    return violations


def _check_publications_dense(path: Path) -> tuple[int, list[Violation]]:
    violations = []
    expected = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        for row in reader:
            if not row:
                continue
            if expected == 0 and row[0] == "nodeId":
                continue  # optional header
            try:
                node_id = int(row[0])
            except ValueError:
                violations.append(
                    Violation("publications_format", f"{path}: non-integer node id {row[0]!r}")
                )
                return expected, violations
            if node_id != expected:
                violations.append(
                    Violation(
                        "node_id_density",
                        f"{path}: row {expected} has node id {node_id}, ids must be"
                        " dense ascending from 0",
                    )
                )
                return expected, violations
            expected += 1
    return expected, violations


def _check_edges(path: Path, node_count: int) -> tuple[int, list[Violation]]:
    violations = []
    count = 0
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            if count == 0 and line == "source,target":
                continue  # optional header
            left, comma, right = line.partition(",")
            try:
                source = int(left)
                target = int(right)
            except ValueError:
                violations.append(
                    Violation("citations_format", f"{path}: malformed edge row {line!r}")
                )
                return count, violations
            if not (0 <= source < node_count and 0 <= target < node_count):
                violations.append(
                    Violation(
                        "edge_endpoint_range",
                        f"{path}: edge ({source}, {target}) references a node id outside"
                        f" [0, {node_count})",
                    )
                )
                return count, violations
            count += 1
    return count, violations


def run_validate(output_dir: str | Path, completeness_threshold: float = 0.0) -> list[Violation]:
    """Run every check against a finished output directory."""
    output_dir = Path(output_dir)
    violations = []

    report = None
    report_path = output_dir / REPORT_FILE
    if report_path.is_file():
        try:
            with open(report_path, "r", encoding="utf-8") as handle:
                report = RunReport.from_dict(json.load(handle))
        except (ValueError, TypeError) as exc:
            violations.append(Violation("report_format", f"{report_path}: {exc}"))
    else:
        violations.append(Violation("missing_file", f"{report_path} not found"))

    for name in (CITATIONS_FILE, PUBLICATIONS_FILE, IDMAP_FILE):
        if not (output_dir / name).is_file():
            violations.append(Violation("missing_file", f"{output_dir / name} not found"))
    if violations and any(v.check == "missing_file" for v in violations):
        return violations

    if report is not None:
        violations.extend(verify_counts(report))
    violations.extend(
        verify_outputs_crosscheck(
            output_dir / CITATIONS_FILE,
            output_dir / PUBLICATIONS_FILE,
            output_dir / IDMAP_FILE,
            report,
        )
    )

    large_path = output_dir / PUBLICATIONS_LARGE_FILE
    skip_large = bool(report is not None and report.settings.get("skipLarge"))
    if large_path.is_file():
        try:
            completeness = verify_completeness(large_path, completeness_threshold)
            violations.extend(completeness.violations)
            if report is not None and completeness.total_rows != report.publications_kept:
                violations.append(
                    Violation(
                        "publication_count_mismatch",
                        f"publications_large rows {completeness.total_rows} !="
                        f" publicationsKept {report.publications_kept}",
                    )
                )
        except TableFormatError as exc:
            violations.append(Violation("large_format", str(exc)))
    elif not skip_large:
        violations.append(Violation("missing_file", f"{large_path} not found"))
    return violations
