"""citedistill: distill knowledge-graph dumps into compact citation tables.

Streams gzip JSON-lines part files, remaps string identifiers to dense
int32 node ids, keeps only Cites relations as an integer edge list, and
writes flattened publication tables plus a run report that accounts for
every input record.
"""

from .emit import (
    FORMAT_MINIMAL,
    FORMAT_WITH_CITATIONS,
    write_citations,
    write_publications,
    write_publications_large,
    write_report,
)
from .idmap import IdMap
from .ingest import (
    DumpLayout,
    LayoutConfig,
    enumerate_dump,
    parse_publication,
    parse_relation,
    stream_lines,
)
from .model import (
    NOT_CITES,
    CitationEdge,
    NotCites,
    PublicationFields,
    PublicationRecord,
    RelationRecord,
    RunReport,
    Skip,
)
from .pipeline import DistillOptions, DistillResult, distill
from .synthgen import Manifest, SynthConfig, generate
from .translate import DanglingSide, DuplicateCounter, count_in_degree, translate_edge
from .validate import (
    Violation,
    run_validate,
    verify_completeness,
    verify_counts,
    verify_outputs_crosscheck,
)

__version__ = "0.1.0"

__all__ = [
    "CitationEdge",
    "DanglingSide",
    "DistillOptions",
    "DistillResult",
    "DumpLayout",
    "DuplicateCounter",
    "FORMAT_MINIMAL",
    "FORMAT_WITH_CITATIONS",
    "IdMap",
    "LayoutConfig",
    "Manifest",
    "NOT_CITES",
    "NotCites",
    "PublicationFields",
    "PublicationRecord",
    "RelationRecord",
    "RunReport",
    "Skip",
    "SynthConfig",
    "Violation",
    "count_in_degree",
    "distill",
    "enumerate_dump",
    "generate",
    "parse_publication",
    "parse_relation",
    "run_validate",
    "stream_lines",
    "translate_edge",
    "verify_completeness",
    "verify_counts",
    "verify_outputs_crosscheck",
    "write_citations",
    "write_publications",
    "write_publications_large",
    "write_report",
]
