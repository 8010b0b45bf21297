"""Diagnostic figures rendered next to the delimited outputs.

Four PNGs summarize a run: record accounting, column completeness, byte
reduction, and the in-degree distribution. matplotlib is imported lazily
so the core pipeline never pays for it (and never needs a display).
"""

from __future__ import annotations

from array import array
from collections import Counter
from pathlib import Path

from .model import LARGE_COLUMNS, OPTIONAL_COLUMNS, RunReport

STYLE = {
    "figure.figsize": (7.5, 4.5),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.axisbelow": True,
}

BAR_COLOR = "#3b6ea5"
ACCENT_COLOR = "#b0413e"


def render_report_figures(report: RunReport, degrees: array, out_dir: str | Path) -> list[Path]:
    """Render all report figures into ``out_dir``; returns written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with plt.rc_context(STYLE):
        written.append(_record_accounting(plt, report, out_dir / "record_accounting.png"))
        written.append(_column_completeness(plt, report, out_dir / "column_completeness.png"))
        written.append(_byte_reduction(plt, report, out_dir / "byte_reduction.png"))
        written.append(_indegree_distribution(plt, degrees, out_dir / "indegree_distribution.png"))
    return written


def _save(plt, fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _record_accounting(plt, report: RunReport, path: Path) -> Path:
    rows = [
        ("publications kept", report.publications_kept),
        ("publications skipped", report.publications_skipped_malformed),
        ("publications duplicate id", report.publications_duplicate_id),
        ("relations other type", report.relations_other_type),
        ("relations malformed", report.relations_skipped_malformed),
        ("edges emitted", report.edges_emitted),
        ("edges dangling", report.edges_dangling_dropped),
        ("edges duplicate", report.edges_duplicate),
        ("edges self loop", report.edges_self_loop),
    ]
    labels = [name for name, _ in rows]
    values = [value for _, value in rows]
    fig, ax = plt.subplots()
    positions = range(len(rows))
    ax.barh(positions, values, color=BAR_COLOR)
    ax.set_yticks(positions, labels)
    ax.invert_yaxis()
    ax.set_xlabel("records")
    ax.set_title("Where every input record went")
    for pos, value in zip(positions, values):
        ax.annotate(f" {value:,}", (value, pos), va="center", fontsize=8)
    return _save(plt, fig, path)


def _column_completeness(plt, report: RunReport, path: Path) -> Path:
    kept = report.publications_kept
    ratios = []
    for column in LARGE_COLUMNS:
        nulls = report.per_column_null_counts.get(column, 0)
        ratios.append(1.0 - nulls / kept if kept else 1.0)
    fig, ax = plt.subplots()
    positions = range(len(LARGE_COLUMNS))
    colors = [BAR_COLOR if column in OPTIONAL_COLUMNS else "#6d8f6b" for column in LARGE_COLUMNS]
    ax.bar(positions, ratios, color=colors)
    ax.set_xticks(positions, LARGE_COLUMNS, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("non-empty fraction")
    ax.set_title("Column completeness")
    return _save(plt, fig, path)


def _byte_reduction(plt, report: RunReport, path: Path) -> Path:
    bars = [
        ("input\n(uncompressed)", report.bytes_in_uncompressed, BAR_COLOR),
        ("input\n(compressed)", report.bytes_in_compressed, BAR_COLOR),
        ("output\n(all tables)", report.bytes_out, ACCENT_COLOR),
        (
            "output\n(edge list)",
            report.bytes_out_by_file.get("citations.csv", 0),
            ACCENT_COLOR,
        ),
    ]
    fig, ax = plt.subplots()
    positions = range(len(bars))
    ax.bar(positions, [value for _, value, _ in bars], color=[color for _, _, color in bars])
    ax.set_xticks(positions, [name for name, _, _ in bars])
    if any(value > 0 for _, value, _ in bars):
        ax.set_yscale("log")
    ax.set_ylabel("bytes")
    ratio = report.derived().get("overallReduction")
    suffix = f" (reduction {ratio:.1f}x)" if ratio else ""
    ax.set_title("Byte footprint" + suffix)
    for pos, (_, value, _) in zip(positions, bars):
        ax.annotate(f"{value:,}", (pos, value), ha="center", va="bottom", fontsize=8)
    return _save(plt, fig, path)


def _indegree_distribution(plt, degrees: array, path: Path) -> Path:
    frequency = Counter()
    zeros = 0
    for degree in degrees:
        if degree:
            frequency[degree] += 1
        else:
            zeros += 1
    fig, ax = plt.subplots()
    if frequency:
        xs = sorted(frequency)
        ys = [frequency[x] for x in xs]
        ax.loglog(xs, ys, marker="o", linestyle="none", markersize=3, color=BAR_COLOR)
        ax.set_xlabel("in-degree (citations received)")
        ax.set_ylabel("number of nodes")
    else:
        ax.text(0.5, 0.5, "no edges", ha="center", va="center", transform=ax.transAxes)
    ax.set_title(f"In-degree distribution ({zeros:,} uncited nodes not shown)")
    return _save(plt, fig, path)
