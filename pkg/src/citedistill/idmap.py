"""Dense int32 node-id assignment and the persisted translation table."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterator

from .model import NODE_ID_LIMIT, IdSpaceExhaustedError, TableFormatError

IDMAP_HEADER = ("openaireId", "nodeId")


class IdMap:
    """Bijective mapping from dump identifiers to dense node ids.

    Ids are handed out sequentially from 0 in assignment order, so the
    value set of a finished map is exactly ``range(len(map))``. The map
    is mutable only until :meth:`finalize`; after that every mutation is
    a programming error.
    """

    __slots__ = ("_forward", "_finalized", "_limit")

    def __init__(self, *, _limit: int = NODE_ID_LIMIT) -> None:
        self._forward: dict[str, int] = {}
        self._finalized = False
        self._limit = _limit

    def __len__(self) -> int:
        return len(self._forward)

    def __contains__(self, openaire_id: str) -> bool:
        return openaire_id in self._forward

    @property
    def finalized(self) -> bool:
        return self._finalized

    def assign(self, openaire_id: str) -> int:
        """Return the node id for ``openaire_id``, assigning one if new."""
        if self._finalized:
            raise RuntimeError("cannot assign into a finalized id map")
        existing = self._forward.get(openaire_id)
        if existing is not None:
            return existing
        node_id = len(self._forward)
        if node_id >= self._limit:
            raise IdSpaceExhaustedError(
                f"node-id space exhausted at {node_id} (int32 design limit)"
            )
        self._forward[openaire_id] = node_id
        return node_id

    def lookup(self, openaire_id: str) -> int | None:
        """Node id assigned to ``openaire_id``, or None if never seen."""
        return self._forward.get(openaire_id)

    def finalize(self) -> "IdMap":
        """Freeze the map. Idempotent; lookups behave exactly as before."""
        self._finalized = True
        return self

    def items(self) -> Iterator[tuple[str, int]]:
        # Insertion order == ascending node id.
        return iter(self._forward.items())

    def persist(self, dest: str | Path) -> int:
        """Write the table as two-column CSV; returns bytes written."""
        from .emit import format_row

        dest = Path(dest)
        with open(dest, "w", encoding="utf-8", newline="") as handle:
            handle.write(",".join(IDMAP_HEADER) + "\n")
            for pair in self._forward.items():
                handle.write(format_row(pair))
        return dest.stat().st_size

    @classmethod
    def load(cls, source: str | Path) -> "IdMap":
        """Read a persisted table back into a finalized map.

        Raises ``TableFormatError`` for a bad header, malformed rows, or
        ids that are not dense ascending from 0 (a truncated or edited
        file usually trips one of these).
        """
        source = Path(source)
        idmap = cls()
        with open(source, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != list(IDMAP_HEADER):
                raise TableFormatError(f"{source}: bad id-map header {header!r}")
            for row_index, row in enumerate(reader):
                if len(row) != 2:
                    raise TableFormatError(
                        f"{source}: row {row_index} has {len(row)} fields, expected 2"
                    )
                openaire_id, node_id_text = row
                try:
                    node_id = int(node_id_text)
                except ValueError:
                    raise TableFormatError(
                        f"{source}: row {row_index} has non-integer node id {node_id_text!r}"
                    ) from None
                if node_id != row_index or not openaire_id:
                    raise TableFormatError(
                        f"{source}: row {row_index} maps {openaire_id!r} to {node_id}, "
                        "expected dense ascending ids"
                    )
                if openaire_id in idmap._forward:
                    raise TableFormatError(f"{source}: duplicate id {openaire_id!r}")
                idmap._forward[openaire_id] = node_id
        return idmap.finalize()
