"""Dump enumeration and streaming parsers for JSON-lines part files.

A dump is a directory tree whose subdirectories hold gzip-compressed
JSON-lines part files, one JSON object per line. Publication and relation
parts are told apart by directory name. Parsing is tolerant: a bad record
becomes a counted ``Skip``, never an aborted run.
"""

from __future__ import annotations

import gzip
import io
import json
import os
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .model import (
    NOT_CITES,
    CorruptCompressionError,
    EmptyLayoutError,
    NotCites,
    PublicationFields,
    RelationRecord,
    RootNotFoundError,
    Skip,
)

GZIP_MAGIC = b"\x1f\x8b"

SKIP_MALFORMED_JSON = "malformed_json"
SKIP_MISSING_ID = "missing_id"
SKIP_MISSING_REL_TYPE = "missing_rel_type"
SKIP_MISSING_ENDPOINT = "missing_endpoint"

AUTHOR_SEPARATOR = "; "


@dataclass(frozen=True)
class LayoutConfig:
    """Which directory names hold which record kind."""

    publication_token: str = "publication"
    relation_token: str = "relation"


@dataclass(frozen=True)
class DumpLayout:
    root: Path
    publication_parts: tuple[Path, ...]
    relation_parts: tuple[Path, ...]


def enumerate_dump(root: str | Path, config: LayoutConfig = LayoutConfig()) -> DumpLayout:
    """List all part files under ``root`` in deterministic order.

    Files are sorted by (directory path, file name) byte order, so two
    runs over the same tree always see the same sequence. Raises
    ``RootNotFoundError`` if the root is missing and ``EmptyLayoutError``
    if no publication parts turn up (almost surely a wrong --input).
    """
    root = Path(root)
    if not root.is_dir():
        raise RootNotFoundError(f"dump root does not exist: {root}")

    publications: list[tuple[bytes, bytes, Path]] = []
    relations: list[tuple[bytes, bytes, Path]] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        rel_dir = os.path.relpath(dirpath, root)
        kind = _classify(rel_dir, config)
        if kind is None:
            continue
        bucket = publications if kind == "publication" else relations
        for name in filenames:
            if name.startswith("."):
                continue
            path = Path(dirpath) / name
            if path.is_file():
                bucket.append((os.fsencode(rel_dir), os.fsencode(name), path))

    publications.sort()
    relations.sort()
    if not publications:
        raise EmptyLayoutError(
            f"no publication part files under {root} "
            f"(looked for directories containing {config.publication_token!r})"
        )
    return DumpLayout(
        root=root,
        publication_parts=tuple(path for _, _, path in publications),
        relation_parts=tuple(path for _, _, path in relations),
    )


def _classify(rel_dir: str, config: LayoutConfig) -> str | None:
    pub_at = rel_dir.rfind(config.publication_token)
    rel_at = rel_dir.rfind(config.relation_token)
    if pub_at < 0 and rel_at < 0:
        return None
    # If both tokens appear, the deeper (later) one wins.
    return "publication" if pub_at > rel_at else "relation"


def stream_lines(part: str | Path) -> Iterator[tuple[int, bytes]]:
    """Yield ``(line_index, raw_line)`` for every line of a part file.

    Gzip is detected by magic bytes, so renamed files still decompress.
    Memory stays bounded by the longest single line. A truncated or
    corrupt gzip stream raises ``CorruptCompressionError`` after yielding
    whatever decoded cleanly.
    """
    path = Path(part)
    with open(path, "rb") as raw:
        head = raw.read(2)
        raw.seek(0)
        if head == GZIP_MAGIC:
            stream = io.BufferedReader(gzip.GzipFile(fileobj=raw), buffer_size=1 << 20)
            try:
                yield from enumerate(stream)
            except (EOFError, OSError, zlib.error) as exc:
                raise CorruptCompressionError(f"{path}: {exc}") from exc
        else:
            yield from enumerate(raw)


def parse_publication(raw: bytes) -> PublicationFields | Skip:
    """Flatten one publication JSON line into scalar fields.

    Never raises for a bad record: malformed JSON or a missing id gives a
    ``Skip`` with a machine-readable reason. Unknown JSON fields are
    ignored; optional fields that are missing, empty, or of the wrong
    type come back as ``None``.
    """
    try:
        obj = json.loads(raw)
    except (ValueError, UnicodeDecodeError):
        return Skip(SKIP_MALFORMED_JSON)
    if not isinstance(obj, dict):
        return Skip(SKIP_MALFORMED_JSON)

    ident = obj.get("id")
    if not isinstance(ident, str) or not ident.strip() or "\n" in ident or "\r" in ident:
        return Skip(SKIP_MISSING_ID)

    return PublicationFields(
        openaire_id=ident,
        doi=_extract_doi(obj.get("pid")),
        title=_clean(obj.get("maintitle")),
        authors=_flatten_authors(obj.get("author")),
        description=_first_description(obj.get("description")),
        date=_clean(obj.get("publicationdate")),
        container=_container_name(obj.get("container")),
        language=_language_code(obj.get("language")),
    )


def parse_relation(raw: bytes) -> RelationRecord | NotCites | Skip:
    """Extract source/target from one relation JSON line.

    Only relations whose relType.name is exactly ``"Cites"`` become
    records; every other well-formed relation returns the ``NOT_CITES``
    sentinel (counted, not kept), and broken records return ``Skip``.
    """
    try:
        obj = json.loads(raw)
    except (ValueError, UnicodeDecodeError):
        return Skip(SKIP_MALFORMED_JSON)
    if not isinstance(obj, dict):
        return Skip(SKIP_MALFORMED_JSON)

    rel_type = obj.get("relType")
    if not isinstance(rel_type, dict):
        return Skip(SKIP_MISSING_REL_TYPE)
    name = rel_type.get("name")
    if not isinstance(name, str) or not name:
        return Skip(SKIP_MISSING_REL_TYPE)
    if name != "Cites":
        return NOT_CITES

    source = obj.get("source")
    target = obj.get("target")
    if not isinstance(source, str) or not source or not isinstance(target, str) or not target:
        return Skip(SKIP_MISSING_ENDPOINT)

    type_field = rel_type.get("type")
    return RelationRecord(
        source=source,
        target=target,
        rel_type_name=name,
        rel_type_type=type_field if isinstance(type_field, str) else "",
    )


def _clean(value: object) -> str | None:
    # Empty strings and non-strings both collapse to "absent".
    if isinstance(value, str) and value != "":
        return value
    return None


def _extract_doi(pids: object) -> str | None:
    # First pid entry whose scheme is "doi" (case-insensitive) wins.
    if not isinstance(pids, list):
        return None
    for entry in pids:
        if isinstance(entry, dict) and str(entry.get("scheme", "")).lower() == "doi":
            return _clean(entry.get("value"))
    return None


def _flatten_authors(authors: object) -> str | None:
    if not isinstance(authors, list):
        return None
    names = []
    for entry in authors:
        if isinstance(entry, dict):
            entry = entry.get("fullname")
        if isinstance(entry, str) and entry != "":
            names.append(entry)
    return AUTHOR_SEPARATOR.join(names) if names else None


def _first_description(value: object) -> str | None:
    if isinstance(value, list):
        for entry in value:
            cleaned = _clean(entry)
            if cleaned is not None:
                return cleaned
        return None
    return _clean(value)


def _container_name(container: object) -> str | None:
    if isinstance(container, dict):
        return _clean(container.get("name"))
    return None


def _language_code(language: object) -> str | None:
    if isinstance(language, dict):
        return _clean(language.get("code"))
    return _clean(language)
