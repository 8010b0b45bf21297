from __future__ import annotations

import pytest

from citedistill.emit import write_citations, write_publications, write_publications_large
from citedistill.idmap import IdMap
from citedistill.model import PublicationRecord, RunReport, TableFormatError
from citedistill.pipeline import DistillOptions, distill
from citedistill.synthgen import SynthConfig, generate
from citedistill.validate import (
    run_validate,
    verify_completeness,
    verify_counts,
    verify_outputs_crosscheck,
)


def consistent_report(**overrides) -> RunReport:
    report = RunReport(
        publications_seen=10,
        publications_kept=8,
        publications_skipped_malformed=1,
        publications_duplicate_id=1,
        relations_seen=20,
        relations_cites=12,
        relations_other_type=7,
        relations_skipped_malformed=1,
        edges_emitted=9,
        edges_dangling_dropped=3,
        edges_dangling_source=1,
        edges_dangling_target=1,
        edges_dangling_both=1,
    )
    for name, value in overrides.items():
        setattr(report, name, value)
    return report


def test_consistent_report_passes():
    assert verify_counts(consistent_report()) == []


def test_decremented_edge_counter_is_caught():
    violations = verify_counts(consistent_report(edges_emitted=8))
    assert [v.check for v in violations] == ["edge_conservation"]


def test_publication_conservation_violation():
    violations = verify_counts(consistent_report(publications_seen=11))
    assert [v.check for v in violations] == ["publication_conservation"]


def test_relation_conservation_violation():
    violations = verify_counts(consistent_report(relations_other_type=6))
    assert [v.check for v in violations] == ["relation_conservation"]


def test_dangling_breakdown_violation():
    violations = verify_counts(consistent_report(edges_dangling_both=0))
    assert {v.check for v in violations} >= {"dangling_breakdown"}


def test_failed_part_is_a_violation():
    report = consistent_report()
    report.parts_failed.append({"path": "relation/part-0.json.gz", "error": "truncated"})
    assert [v.check for v in verify_counts(report)] == ["corrupt_parts"]


def test_dedup_changes_edge_identity():
    report = consistent_report(edges_emitted=7, edges_duplicate=2)
    report.settings["dedupEdges"] = True
    assert verify_counts(report) == []
    report.settings["dedupEdges"] = False
    assert [v.check for v in verify_counts(report)] == ["edge_conservation"]


def test_end_to_end_report_passes(tmp_path):
    generate(SynthConfig(seed=6, n_publications=100, n_relations=400), tmp_path / "dump")
    result = distill(tmp_path / "dump", tmp_path / "out", DistillOptions(figures=False))
    assert verify_counts(result.report) == []
    assert result.violations == []


# ---------------------------------------------------------------------------
# completeness


def records_with_half_dois(n: int):
    for index in range(n):
        yield PublicationRecord(
            node_id=index,
            openaire_id=f"id::{index:032x}",
            doi=f"10.1/{index}" if index % 2 == 0 else None,
            title=f"Title {index}",
        )


def test_completeness_ratios(tmp_path):
    path = tmp_path / "large.csv"
    write_publications_large(records_with_half_dois(100), path)
    result = verify_completeness(path)
    assert result.total_rows == 100
    assert result.ratios["title"] == 1.0
    assert result.ratios["doi"] == 0.5
    assert result.ratios["authors"] == 0.0
    assert result.violations == []


def test_completeness_threshold_flags_columns(tmp_path):
    path = tmp_path / "large.csv"
    write_publications_large(records_with_half_dois(10), path)
    result = verify_completeness(path, threshold=0.6)
    flagged = {v.message.split("'")[1] for v in result.violations}
    assert "doi" in flagged
    assert "title" not in flagged


def test_completeness_matches_generator_config(tmp_path):
    config = SynthConfig(
        seed=123,
        n_publications=500,
        n_relations=0,
        missing_field_rates={"description": 0.2},
    )
    manifest = generate(config, tmp_path / "dump")
    distill(tmp_path / "dump", tmp_path / "out", DistillOptions(figures=False))
    result = verify_completeness(tmp_path / "out" / "publications_large.csv")
    expected = 1 - sum(1 for p in manifest.publications if p["description"] is None) / 500
    assert result.ratios["description"] == expected


def test_completeness_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        verify_completeness(tmp_path / "nope.csv")


def test_completeness_malformed_header_raises(tmp_path):
    path = tmp_path / "large.csv"
    path.write_text("wrong,header\n")
    with pytest.raises(TableFormatError):
        verify_completeness(path)


# ---------------------------------------------------------------------------
# cross-check


def write_trio(tmp_path, edges, n):
    idmap = IdMap()
    records = []
    for index in range(n):
        key = f"id::{index:032x}"
        idmap.assign(key)
        records.append(PublicationRecord(node_id=index, openaire_id=key, doi=None))
    idmap.finalize()
    write_citations(edges, tmp_path / "citations.csv")
    write_publications(iter(records), tmp_path / "publications.csv")
    idmap.persist(tmp_path / "idmap.csv")
    return tmp_path / "citations.csv", tmp_path / "publications.csv", tmp_path / "idmap.csv"


def test_crosscheck_consistent_trio(tmp_path):
    paths = write_trio(tmp_path, [(0, 1), (2, 1)], 3)
    assert verify_outputs_crosscheck(*paths) == []


def test_crosscheck_out_of_range_edge(tmp_path):
    paths = write_trio(tmp_path, [(0, 3)], 3)
    violations = verify_outputs_crosscheck(*paths)
    assert [v.check for v in violations] == ["edge_endpoint_range"]


def test_crosscheck_gap_in_node_ids(tmp_path):
    paths = write_trio(tmp_path, [], 3)
    lines = paths[1].read_text().splitlines()
    paths[1].write_text("\n".join(lines[:1] + lines[2:]) + "\n")
    violations = verify_outputs_crosscheck(*paths)
    assert "node_id_density" in {v.check for v in violations}


def test_crosscheck_idmap_size_mismatch(tmp_path):
    paths = write_trio(tmp_path, [], 3)
    lines = paths[2].read_text().splitlines()
    paths[2].write_text("\n".join(lines[:-1]) + "\n")
    violations = verify_outputs_crosscheck(*paths)
    assert "idmap_publications_mismatch" in {v.check for v in violations}


def test_crosscheck_report_count_mismatch(tmp_path):
    paths = write_trio(tmp_path, [(0, 1)], 3)
    report = RunReport(publications_kept=3, edges_emitted=5)
    violations = verify_outputs_crosscheck(*paths, report)
    assert [v.check for v in violations] == ["edge_count_mismatch"]


def test_run_validate_missing_outputs(tmp_path):
    violations = run_validate(tmp_path)
    assert violations
    assert all(v.check in ("missing_file",) for v in violations)
