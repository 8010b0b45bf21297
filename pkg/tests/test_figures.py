from __future__ import annotations

from array import array

from citedistill.figures import render_report_figures
from citedistill.model import RunReport
from citedistill.pipeline import DistillOptions, distill
from citedistill.synthgen import SynthConfig, generate

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

EXPECTED_NAMES = {
    "record_accounting.png",
    "column_completeness.png",
    "byte_reduction.png",
    "indegree_distribution.png",
}


def test_renders_all_figures(tmp_path):
    report = RunReport(
        publications_seen=10,
        publications_kept=10,
        edges_emitted=6,
        bytes_in_compressed=100,
        bytes_in_uncompressed=900,
        bytes_out=60,
        bytes_out_by_file={"citations.csv": 30},
        per_column_null_counts={"doi": 3},
    )
    degrees = array("i", [0, 1, 2, 0, 3])
    written = render_report_figures(report, degrees, tmp_path)
    assert {path.name for path in written} == EXPECTED_NAMES
    for path in written:
        assert path.read_bytes()[:8] == PNG_MAGIC


def test_renders_for_empty_run(tmp_path):
    written = render_report_figures(RunReport(), array("i"), tmp_path)
    assert len(written) == 4


def test_distill_writes_figures_beside_tables(tmp_path):
    generate(SynthConfig(seed=2, n_publications=40, n_relations=120), tmp_path / "dump")
    result = distill(tmp_path / "dump", tmp_path / "out", DistillOptions(figures=True))
    assert result.ok
    names = {path.name for path in (tmp_path / "out" / "figures").glob("*.png")}
    assert names == EXPECTED_NAMES
