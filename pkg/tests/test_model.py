from __future__ import annotations

import json

from citedistill.model import RunReport


def test_report_round_trips_through_camel_case_json():
    report = RunReport(
        publications_seen=10,
        publications_kept=9,
        publications_skipped_malformed=1,
        relations_seen=5,
        relations_cites=3,
        edges_emitted=2,
        per_column_null_counts={"doi": 4},
        settings={"dedupEdges": True},
    )
    data = json.loads(json.dumps(report.to_dict()))
    assert data["publicationsSeen"] == 10
    assert data["perColumnNullCounts"] == {"doi": 4}
    assert "derived" in data
    back = RunReport.from_dict(data)
    assert back == report


def test_derived_ratios_are_none_for_empty_run():
    derived = RunReport().derived()
    assert derived["compressionRatio"] is None
    assert derived["bytesPerEdge"] is None


def test_derived_ratios_match_hand_computation():
    report = RunReport(
        edges_emitted=4,
        bytes_in_compressed=100,
        bytes_in_uncompressed=1000,
        bytes_out=50,
        bytes_in_by_kind={"relation": {"compressed": 60, "uncompressed": 600}},
        bytes_out_by_file={"citations.csv": 40},
    )
    derived = report.derived()
    assert derived["compressionRatio"] == 10.0
    assert derived["bytesPerEdge"] == 10.0
    assert derived["relationJsonToEdgeRowRatio"] == 15.0
