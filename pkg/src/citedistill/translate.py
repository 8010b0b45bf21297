"""Relation-to-edge translation, in-degree counting, duplicate accounting."""

from __future__ import annotations

import heapq
import os
import tempfile
from array import array
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .model import CitationEdge, EndpointOutOfRangeError, RelationRecord

_READ_BLOCK = 1 << 16


class DanglingSide(Enum):
    """Which endpoint of a Cites relation had no publication record."""

    SOURCE = "source"
    TARGET = "target"
    BOTH = "both"


def translate_edge(rel: RelationRecord, node_ids) -> CitationEdge | DanglingSide:
    """Rewrite a Cites relation to integer endpoints via the id map.

    ``node_ids`` is anything with ``lookup(str) -> int | None`` (normally
    a finalized IdMap). A missing endpoint yields the dangling side
    instead of an edge; dangling relations are counted, never kept.
    """
    source = node_ids.lookup(rel.source)
    target = node_ids.lookup(rel.target)
    if source is None and target is None:
        return DanglingSide.BOTH
    if source is None:
        return DanglingSide.SOURCE
    if target is None:
        return DanglingSide.TARGET
    return (source, target)


def count_in_degree(edges: Iterable[CitationEdge], node_count: int) -> array:
    """Tally how many edges point at each node.

    Returns an int32 array of length ``node_count`` where slot v holds
    the in-degree of node v. Any endpoint outside [0, node_count) raises
    ``EndpointOutOfRangeError`` — that would mean an internal bug, since
    translation only ever produces assigned ids.
    """
    degrees = array("i", bytes(4 * node_count))
    for source, target in edges:
        if not (0 <= source < node_count and 0 <= target < node_count):
            raise EndpointOutOfRangeError(
                f"edge ({source}, {target}) outside node range [0, {node_count})"
            )
        degrees[target] += 1
    return degrees


def pack_edge(source: int, target: int) -> int:
    """Pack an edge into one 64-bit key (both ids are below 2^31)."""
    return (source << 32) | target


def unpack_edge(key: int) -> CitationEdge:
    return (key >> 32, key & 0xFFFFFFFF)


class DuplicateCounter:
    """Counts exact duplicate (source, target) pairs in bounded memory.

    Edges are packed into 64-bit keys and buffered; full buffers are
    sorted and spilled to disk, and :meth:`finish` merge-scans the sorted
    runs. Memory stays O(chunk_size) no matter how many edges pass
    through, which is what lets the pipeline report duplicates without
    ever holding the edge set.
    """

    def __init__(self, spill_dir: str | Path | None = None, chunk_size: int = 1_000_000) -> None:
        if chunk_size < 2:
            raise ValueError("chunk_size must be at least 2")
        self._spill_dir = Path(spill_dir) if spill_dir is not None else None
        self._chunk_size = chunk_size
        self._chunk: list[int] = []
        self._spills: list[str] = []
        self.total = 0

    def add(self, source: int, target: int) -> None:
        self._chunk.append((source << 32) | target)
        self.total += 1
        if len(self._chunk) >= self._chunk_size:
            self._spill()

    def _spill(self) -> None:
        self._chunk.sort()
        fd, name = tempfile.mkstemp(prefix="edges-", suffix=".spill", dir=self._spill_dir)
        with os.fdopen(fd, "wb") as handle:
            array("q", self._chunk).tofile(handle)
        self._spills.append(name)
        self._chunk = []

    def finish(self) -> int:
        """Return the number of surplus occurrences (total - distinct)."""
        try:
            self._chunk.sort()
            if not self._spills:
                merged: Iterable[int] = self._chunk
            else:
                runs = [open(name, "rb") for name in self._spills]
                merged = heapq.merge(*(_read_run(handle) for handle in runs), iter(self._chunk))
            duplicates = 0
            previous = None
            for key in merged:
                if key == previous:
                    duplicates += 1
                else:
                    previous = key
            return duplicates
        finally:
            self.close()

    def close(self) -> None:
        self._chunk = []
        for name in self._spills:
            try:
                os.unlink(name)
            except OSError:
                pass
        self._spills = []


def _read_run(handle) -> Iterator[int]:
    try:
        while True:
            block = array("q")
            try:
                block.fromfile(handle, _READ_BLOCK)
            except EOFError:
                yield from block
                return
            yield from block
    finally:
        handle.close()
