"""Shared domain types and error classes for the distillation pipeline.

Everything here is plain data: no I/O, no globals. Optional publication
fields use ``None`` for "absent", which is rendered as an empty CSV field
on output (and mapped back from empty JSON strings on input).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields

# Node ids are int32 by construction; the dense id space ends here.
NODE_ID_LIMIT = 2**31

# Column order of publications_large.csv. These names are the external
# interface and appear verbatim in file headers and reports.
LARGE_COLUMNS = (
    "nodeId",
    "openaireId",
    "doi",
    "title",
    "authors",
    "description",
    "date",
    "container",
    "citations",
    "language",
)

# Columns that may legitimately be empty for a publication.
OPTIONAL_COLUMNS = ("doi", "title", "authors", "description", "date", "container", "language")


class PipelineError(Exception):
    """Base class for every error this package raises on purpose."""


class RootNotFoundError(PipelineError):
    """The dump root directory does not exist."""


class EmptyLayoutError(PipelineError):
    """No publication part files were found under the dump root."""


class CorruptCompressionError(PipelineError):
    """A compressed part file is truncated or otherwise unreadable."""


class TableFormatError(PipelineError):
    """A persisted table (id map, CSV output) is malformed."""


class IdSpaceExhaustedError(PipelineError):
    """The dense int32 node-id space is full."""


class EndpointOutOfRangeError(PipelineError):
    """An edge endpoint fell outside the assigned node-id range."""


@dataclass(slots=True)
class PublicationFields:
    """Flattened publication metadata, before a node id is assigned.

    ``None`` means the dump did not provide the field (or provided an
    empty string, which is treated the same).
    """

    openaire_id: str
    doi: str | None = None
    title: str | None = None
    authors: str | None = None
    description: str | None = None
    date: str | None = None
    container: str | None = None
    language: str | None = None


@dataclass(slots=True)
class PublicationRecord:
    """One finished row of the publication tables."""

    node_id: int
    openaire_id: str
    doi: str | None = None
    title: str | None = None
    authors: str | None = None
    description: str | None = None
    date: str | None = None
    container: str | None = None
    citations: int = 0
    language: str | None = None


@dataclass(slots=True)
class RelationRecord:
    """A relation of type Cites, as extracted from one dump line."""

    source: str
    target: str
    rel_type_name: str
    rel_type_type: str = ""


# An edge is just a (source, target) node-id pair; millions of them exist
# at a time, so they stay plain tuples rather than objects.
CitationEdge = tuple[int, int]


@dataclass(slots=True, frozen=True)
class Skip:
    """A record that was dropped, with a machine-readable reason."""

    reason: str


class NotCites:
    """Sentinel type for relations whose type is anything but Cites."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "NOT_CITES"


NOT_CITES = NotCites()


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(part.capitalize() for part in rest)


def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


@dataclass
class RunReport:
    """Counter set proving that every input record was accounted for.

    The conservation identities over these counters are checked by
    ``validate.verify_counts``; the JSON rendering (camelCase keys plus a
    ``derived`` block of ratios) is the on-disk report format.
    """

    publications_seen: int = 0
    publications_kept: int = 0
    publications_skipped_malformed: int = 0
    publications_duplicate_id: int = 0
    relations_seen: int = 0
    relations_cites: int = 0
    relations_other_type: int = 0
    relations_skipped_malformed: int = 0
    relations_name_type_mismatch: int = 0
    edges_emitted: int = 0
    edges_dangling_dropped: int = 0
    edges_dangling_source: int = 0
    edges_dangling_target: int = 0
    edges_dangling_both: int = 0
    edges_self_loop: int = 0
    edges_duplicate: int = 0
    bytes_in_compressed: int = 0
    bytes_in_uncompressed: int = 0
    bytes_out: int = 0
    per_column_null_counts: dict[str, int] = field(default_factory=dict)
    bytes_in_by_kind: dict[str, dict[str, int]] = field(default_factory=dict)
    bytes_out_by_file: dict[str, int] = field(default_factory=dict)
    parts_failed: list[dict] = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def derived(self) -> dict:
        """Ratios computed from the raw counters (None when undefined)."""

        def ratio(num: int, den: int) -> float | None:
            return num / den if den else None

        relation_bytes = self.bytes_in_by_kind.get("relation", {}).get("uncompressed", 0)
        publication_bytes = self.bytes_in_by_kind.get("publication", {}).get("uncompressed", 0)
        relation_compressed = self.bytes_in_by_kind.get("relation", {}).get("compressed", 0)
        publication_compressed = self.bytes_in_by_kind.get("publication", {}).get("compressed", 0)
        citation_bytes = self.bytes_out_by_file.get("citations.csv", 0)
        return {
            "compressionRatio": ratio(self.bytes_in_uncompressed, self.bytes_in_compressed),
            "publicationCompressionRatio": ratio(publication_bytes, publication_compressed),
            "relationCompressionRatio": ratio(relation_bytes, relation_compressed),
            "bytesPerEdge": ratio(citation_bytes, self.edges_emitted),
            "relationJsonToEdgeRowRatio": ratio(relation_bytes, citation_bytes),
            "overallReduction": ratio(self.bytes_in_uncompressed, self.bytes_out),
        }

    def to_dict(self) -> dict:
        """Render with camelCase keys, matching the report.json schema."""
        out = {_camel(f.name): getattr(self, f.name) for f in fields(self)}
        out["derived"] = self.derived()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = _snake(key)
            if name in known:
                kwargs[name] = value
        return cls(**kwargs)
