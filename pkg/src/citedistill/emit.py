"""Writers for the output CSVs and the run report.

Formatting is bit-exact and documented: UTF-8, LF line endings, no BOM,
minimal RFC-4180 quoting (fields are quoted only when they contain the
delimiter, a quote, or a line break). Plain integer rows therefore never
carry quotes, and repeated runs produce identical bytes.
"""

from __future__ import annotations

import json
import re
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterable, Iterator

from .model import LARGE_COLUMNS, CitationEdge, PublicationRecord, RunReport

FORMAT_MINIMAL = "minimal"
FORMAT_WITH_CITATIONS = "with-citations"

# A field must be quoted if it contains the delimiter, a quote, or either
# line-break character. (The stdlib csv writer does not quote a lone CR
# when rows end in LF, which would corrupt round-trips.)
_NEEDS_QUOTES = re.compile(r'[,"\r\n]')


def format_field(value: object) -> str:
    """Render one CSV field with minimal RFC-4180 quoting; None is empty."""
    if value is None:
        return ""
    text = value if isinstance(value, str) else str(value)
    if _NEEDS_QUOTES.search(text):
        return '"' + text.replace('"', '""') + '"'
    return text


def format_row(fields: Iterable[object]) -> str:
    """Render one CSV row, LF-terminated."""
    return ",".join(map(format_field, fields)) + "\n"


class _CountingSink:
    """Text-writer facade over a binary sink that counts encoded bytes."""

    __slots__ = ("_raw", "count")

    def __init__(self, raw: IO[bytes]) -> None:
        self._raw = raw
        self.count = 0

    def write(self, text: str) -> int:
        data = text.encode("utf-8")
        self._raw.write(data)
        self.count += len(data)
        return len(text)


@contextmanager
def _sink(dest: str | Path | IO[bytes]) -> Iterator[_CountingSink]:
    if isinstance(dest, (str, Path)):
        with open(dest, "wb") as handle:
            yield _CountingSink(handle)
    else:
        yield _CountingSink(dest)


def write_citations(
    edges: Iterable[CitationEdge], dest: str | Path | IO[bytes], header: bool = False
) -> int:
    """Write the edge list, one "source,target" line per edge.

    No header by default; pass ``header=True`` for a "source,target"
    first line. Returns bytes written.
    """
    with _sink(dest) as out:
        write = out.write
        if header:
            write("source,target\n")
        for source, target in edges:
            write(f"{source},{target}\n")
        return out.count


def write_publications(
    records: Iterable[PublicationRecord],
    dest: str | Path | IO[bytes],
    fmt: str = FORMAT_MINIMAL,
    header: bool = False,
) -> int:
    """Write the compact publication table, ordered by node id.

    ``minimal`` emits "nodeId,doi" rows; ``with-citations`` appends the
    in-degree column. Absent DOIs render as empty fields.
    """
    if fmt not in (FORMAT_MINIMAL, FORMAT_WITH_CITATIONS):
        raise ValueError(f"unknown publications format {fmt!r}")
    with_citations = fmt == FORMAT_WITH_CITATIONS
    with _sink(dest) as out:
        if header:
            out.write("nodeId,doi,citations\n" if with_citations else "nodeId,doi\n")
        if with_citations:
            for rec in records:
                out.write(format_row((rec.node_id, rec.doi, rec.citations)))
        else:
            for rec in records:
                out.write(format_row((rec.node_id, rec.doi)))
        return out.count


def write_publications_large(
    records: Iterable[PublicationRecord], dest: str | Path | IO[bytes]
) -> int:
    """Write the full ten-column publication table, with header row."""
    with _sink(dest) as out:
        out.write(",".join(LARGE_COLUMNS) + "\n")
        for rec in records:
            out.write(
                format_row(
                    (
                        rec.node_id,
                        rec.openaire_id,
                        rec.doi,
                        rec.title,
                        rec.authors,
                        rec.description,
                        rec.date,
                        rec.container,
                        rec.citations,
                        rec.language,
                    )
                )
            )
        return out.count


def write_report(report: RunReport, dest: str | Path | IO[bytes]) -> int:
    """Write the run report as pretty-printed JSON. Returns bytes written."""
    with _sink(dest) as out:
        out.write(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
        out.write("\n")
        return out.count


def read_report(source: str | Path) -> RunReport:
    with open(source, "r", encoding="utf-8") as handle:
        return RunReport.from_dict(json.load(handle))
