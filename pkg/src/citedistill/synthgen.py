"""Deterministic generator of dump-shaped corpora with ground truth.

Produces gzip JSON-lines part files laid out like a real dump
(publication/ and relation/ folders), plus a manifest recording exactly
what went in: every publication's expected flattened field values, every
relation, and the edges a correct pipeline must produce. The same config
always yields byte-identical files, so tests can hash outputs.
"""

from __future__ import annotations

import gzip
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_MISSING_RATE = 0.1

ID_PREFIXES = ("doi_________", "dedup_wf_002", "od______1234", "pmid________", "arXiv_______")

NON_CITES_TYPES = (
    ("IsSupplementedBy", "supplement"),
    ("References", "relationship"),
    ("IsPartOf", "part"),
    ("IsVersionOf", "version"),
)

PROVENANCES = ("Inferred by OpenAIRE", "Harvested", "Linked by user")

# Rate at which a Cites relation carries a surprising relType.type; the
# parser matches on name only and reports these.
NAME_TYPE_MISMATCH_RATE = 0.01

TITLE_WORDS = (
    "graph", "citation", "network", "analysis", "dynamics", "model", "survey",
    "method", "learning", "structure", "evolution", "data", "complex", "study",
)

SURNAMES = ("Ada", "Boole", "Curie", "Dijkstra", "Erdos", "Franklin", "Gauss", "Hopper")

CONTAINERS = (
    "Journal of Graph Studies",
    "Acta Informatica, Series B",
    "Network Science Letters",
    "Proceedings of the Data Symposium",
    'Annals of "Applied" Analysis',
)

LANGUAGES = ("en", "de", "fr", "cs", "es", "und")


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for one synthetic dump."""

    seed: int = 0
    n_publications: int = 1000
    n_relations: int = 5000
    cites_fraction: float = 0.8
    dangling_fraction: float = 0.05
    duplicate_fraction: float = 0.02
    missing_field_rates: dict[str, float] = field(default_factory=dict)
    parts_per_folder: int = 3
    relation_parts_per_folder: int | None = None

    def check(self) -> None:
        for name in ("cites_fraction", "dangling_fraction", "duplicate_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for column, rate in self.missing_field_rates.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"missing rate for {column!r} must be in [0, 1], got {rate}")
        for name in ("n_publications", "n_relations", "parts_per_folder"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.parts_per_folder == 0:
            raise ValueError("parts_per_folder must be at least 1")

    def missing_rate(self, column: str) -> float:
        return self.missing_field_rates.get(column, DEFAULT_MISSING_RATE)


@dataclass
class Manifest:
    """Ground truth for a generated dump, independent of the pipeline.

    ``publications`` holds the flattened values a correct run must emit
    (None for absent); ``expected_edges`` the Cites pairs whose endpoints
    are both publications, in stream order.
    """

    publications: list[dict]
    relations: list[tuple[str, str, str]]
    expected_edges: list[tuple[str, str]]
    publication_parts: list[str]
    relation_parts: list[str]

    def write(self, dest: str | Path) -> None:
        payload = {
            "publications": self.publications,
            "relations": self.relations,
            "expectedEdges": self.expected_edges,
            "publicationParts": self.publication_parts,
            "relationParts": self.relation_parts,
        }
        with open(dest, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, separators=(",", ":"))
            handle.write("\n")

    @classmethod
    def load(cls, source: str | Path) -> "Manifest":
        with open(source, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return cls(
            publications=payload["publications"],
            relations=[tuple(item) for item in payload["relations"]],
            expected_edges=[tuple(item) for item in payload["expectedEdges"]],
            publication_parts=payload["publicationParts"],
            relation_parts=payload["relationParts"],
        )


def generate(config: SynthConfig, out_dir: str | Path, manifest: bool = True) -> Manifest | None:
    """Write a synthetic dump under ``out_dir``.

    With ``manifest=True`` (the default) the ground truth is returned and
    also persisted as manifest.json beside the dump folders. Passing
    ``manifest=False`` streams everything and returns None, which keeps
    generation memory flat for very large relation counts.
    """
    config.check()
    rng = random.Random(config.seed)
    out_dir = Path(out_dir)
    pub_dir = out_dir / "publication"
    rel_dir = out_dir / "relation"
    pub_dir.mkdir(parents=True, exist_ok=True)
    rel_dir.mkdir(parents=True, exist_ok=True)

    pub_ids: list[str] = []
    publications: list[dict] = [] if manifest else None
    pub_parts = _generate_publications(config, rng, pub_dir, pub_ids, publications)

    relations: list[tuple[str, str, str]] | None = [] if manifest else None
    rel_parts = _generate_relations(config, rng, rel_dir, pub_ids, relations)

    if not manifest:
        return None
    id_set = set(pub_ids)
    expected = [
        (source, target)
        for source, target, name in relations
        if name == "Cites" and source in id_set and target in id_set
    ]
    result = Manifest(
        publications=publications,
        relations=relations,
        expected_edges=expected,
        publication_parts=pub_parts,
        relation_parts=rel_parts,
    )
    result.write(out_dir / "manifest.json")
    return result


def _new_id(rng: random.Random) -> str:
    prefix = ID_PREFIXES[rng.randrange(len(ID_PREFIXES))]
    return f"{prefix}::{rng.getrandbits(128):032x}"


def _part_sizes(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + 1 if i < extra else base for i in range(parts)]


def _open_part(directory: Path, index: int) -> gzip.GzipFile:
    # mtime=0 and an explicit empty filename keep the bytes reproducible.
    raw = open(directory / f"part-{index:05d}.json.gz", "wb")
    return gzip.GzipFile(filename="", mode="wb", compresslevel=1, fileobj=raw, mtime=0)


def _generate_publications(
    config: SynthConfig,
    rng: random.Random,
    pub_dir: Path,
    pub_ids: list[str],
    publications: list[dict] | None,
) -> list[str]:
    parts = []
    sizes = _part_sizes(config.n_publications, config.parts_per_folder)
    for part_index, size in enumerate(sizes):
        parts.append(f"publication/part-{part_index:05d}.json.gz")
        with _open_part(pub_dir, part_index) as out:
            for _ in range(size):
                record, expected = _publication_record(config, rng)
                pub_ids.append(expected["openaireId"])
                if publications is not None:
                    publications.append(expected)
                out.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")).encode("utf-8"))
                out.write(b"\n")
    return parts


def _maybe_text(rng: random.Random, rate: float, make):
    """Draw a value that is sometimes missing, sometimes an empty string.

    Returns (json_value, expected_flat_value); json_value is _OMIT when
    the key should not appear at all.
    """
    if rng.random() < rate:
        # A fifth of the "missing" draws are present-but-empty, which the
        # flattening must treat the same as absent.
        if rng.random() < 0.2:
            return "", None
        return _OMIT, None
    value = make()
    return value, value


_OMIT = object()


def _title(rng: random.Random) -> str:
    words = [TITLE_WORDS[rng.randrange(len(TITLE_WORDS))] for _ in range(rng.randint(2, 6))]
    text = " ".join(words).capitalize()
    roll = rng.random()
    if roll < 0.15:
        text += ", part " + str(rng.randint(1, 9))
    elif roll < 0.25:
        text += ' and "' + TITLE_WORDS[rng.randrange(len(TITLE_WORDS))] + '"'
    elif roll < 0.30:
        text += "\nsecond title line"
    return text


def _description(rng: random.Random) -> str:
    words = [TITLE_WORDS[rng.randrange(len(TITLE_WORDS))] for _ in range(rng.randint(5, 14))]
    text = "We study " + " ".join(words) + "."
    roll = rng.random()
    if roll < 0.2:
        text += " Results, however, vary."
    elif roll < 0.28:
        text += "\nSecond paragraph."
    elif roll < 0.31:
        text += "\r\nWindows paragraph."
    return text


def _author_list(rng: random.Random) -> list[str]:
    names = []
    for _ in range(rng.randint(1, 4)):
        surname = SURNAMES[rng.randrange(len(SURNAMES))]
        initial = chr(ord("A") + rng.randrange(26))
        if rng.random() < 0.2:
            names.append(f"{surname}, {initial}.")
        else:
            names.append(f"{initial}. {surname}")
    return names


def _doi(rng: random.Random) -> str:
    suffix = f"{rng.getrandbits(40):010x}"
    if rng.random() < 0.03:
        suffix += ",v2"
    return f"10.{rng.randint(1000, 9999)}/{suffix}"


def _date(rng: random.Random) -> str:
    return f"{rng.randint(1900, 2025):04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"


def _publication_record(config: SynthConfig, rng: random.Random) -> tuple[dict, dict]:
    openaire_id = _new_id(rng)
    record: dict = {"id": openaire_id, "type": "publication"}
    expected: dict = {"openaireId": openaire_id}

    doi_value, expected["doi"] = _maybe_text(rng, config.missing_rate("doi"), lambda: _doi(rng))
    pid = []
    if rng.random() < 0.3:
        pid.append({"scheme": "pmc", "value": f"PMC{rng.randint(1000, 999999)}"})
    if doi_value is not _OMIT:
        pid.append({"scheme": "doi" if rng.random() < 0.8 else "DOI", "value": doi_value})
    if pid:
        record["pid"] = pid

    title_value, expected["title"] = _maybe_text(rng, config.missing_rate("title"), lambda: _title(rng))
    if title_value is not _OMIT:
        record["maintitle"] = title_value

    if rng.random() < config.missing_rate("authors"):
        expected["authors"] = None
        if rng.random() < 0.2:
            record["author"] = []
    else:
        names = _author_list(rng)
        record["author"] = [
            {"fullname": name, "rank": rank + 1} for rank, name in enumerate(names)
        ]
        expected["authors"] = "; ".join(names)

    desc_value, expected["description"] = _maybe_text(
        rng, config.missing_rate("description"), lambda: _description(rng)
    )
    if desc_value is not _OMIT:
        record["description"] = [desc_value] if desc_value else []
        if desc_value and rng.random() < 0.2:
            record["description"].append("Alternative abstract, ignored.")

    date_value, expected["date"] = _maybe_text(rng, config.missing_rate("date"), lambda: _date(rng))
    if date_value is not _OMIT:
        record["publicationdate"] = date_value

    container_value, expected["container"] = _maybe_text(
        rng, config.missing_rate("container"), lambda: CONTAINERS[rng.randrange(len(CONTAINERS))]
    )
    if container_value is not _OMIT:
        record["container"] = {"name": container_value, "issnOnline": ""}

    language_value, expected["language"] = _maybe_text(
        rng, config.missing_rate("language"), lambda: LANGUAGES[rng.randrange(len(LANGUAGES))]
    )
    if language_value is not _OMIT:
        record["language"] = {"code": language_value, "label": "label-" + str(language_value)}

    if rng.random() < 0.1:
        record["publisher"] = "Synthetic Press"
    return record, expected


_RELATION_TEMPLATE = (
    '{"provenance":{"provenance":"%s","trust":"0.%d"},'
    '"relType":{"name":"%s","type":"%s"},'
    '"source":"%s","sourceType":"product",'
    '"target":"%s","targetType":"product","validated":%s}\n'
)


def _generate_relations(
    config: SynthConfig,
    rng: random.Random,
    rel_dir: Path,
    pub_ids: list[str],
    relations: list[tuple[str, str, str]] | None,
) -> list[str]:
    parts = []
    n_pubs = len(pub_ids)
    track_prior = config.duplicate_fraction > 0
    prior_cites: list[tuple[str, str]] = []

    def endpoint(dangle: bool) -> str:
        if dangle or n_pubs == 0:
            return _new_id(rng)
        return pub_ids[rng.randrange(n_pubs)]

    folder_parts = config.relation_parts_per_folder or config.parts_per_folder
    sizes = _part_sizes(config.n_relations, folder_parts)
    for part_index, size in enumerate(sizes):
        parts.append(f"relation/part-{part_index:05d}.json.gz")
        with _open_part(rel_dir, part_index) as out:
            for _ in range(size):
                if rng.random() < config.cites_fraction:
                    name = "Cites"
                    rel_type = "citation"
                    if rng.random() < NAME_TYPE_MISMATCH_RATE:
                        rel_type = "relationship"
                    if prior_cites and rng.random() < config.duplicate_fraction:
                        source, target = prior_cites[rng.randrange(len(prior_cites))]
                    elif rng.random() < config.dangling_fraction:
                        side = rng.random()
                        source = endpoint(side < 0.6)
                        target = endpoint(side >= 0.4)
                    else:
                        source = endpoint(False)
                        target = endpoint(False)
                    if track_prior:
                        prior_cites.append((source, target))
                else:
                    name, rel_type = NON_CITES_TYPES[rng.randrange(len(NON_CITES_TYPES))]
                    source = endpoint(False)
                    target = endpoint(False)
                line = _RELATION_TEMPLATE % (
                    PROVENANCES[rng.randrange(len(PROVENANCES))],
                    rng.randint(1, 9),
                    name,
                    rel_type,
                    source,
                    target,
                    "true" if rng.random() < 0.2 else "false",
                )
                out.write(line.encode("utf-8"))
                if relations is not None:
                    relations.append((source, target, name))
    return parts
