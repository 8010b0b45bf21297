"""Command line interface: generate, distill, validate.

Progress and errors go to stderr; stdout carries only machine-readable
output (validation violations as JSON lines), so the tool composes in
shell pipelines. Exit codes: 0 success, 1 validation failure, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .emit import FORMAT_MINIMAL, FORMAT_WITH_CITATIONS
from .model import OPTIONAL_COLUMNS, PipelineError
from .pipeline import DistillOptions, distill, print_progress
from .synthgen import SynthConfig, generate
from .validate import run_validate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citedistill",
        description="Distill knowledge-graph dumps into a compact integer citation edge list.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dist = sub.add_parser("distill", help="run the full pipeline over a dump directory")
    dist.add_argument("--input", required=True, type=Path, help="dump root directory")
    dist.add_argument("--output", required=True, type=Path, help="directory for the output files")
    dist.add_argument(
        "--dedup-edges",
        action="store_true",
        help="drop exact duplicate edges (keeps first occurrence; needs memory for the distinct set)",
    )
    dist.add_argument(
        "--headers",
        action="store_true",
        help="write header rows on citations.csv and publications.csv",
    )
    dist.add_argument(
        "--publications-format",
        choices=(FORMAT_MINIMAL, FORMAT_WITH_CITATIONS),
        default=FORMAT_MINIMAL,
        help="columns of publications.csv (default: %(default)s)",
    )
    dist.add_argument("--threads", type=int, default=1, help="part-file workers per pass")
    dist.add_argument(
        "--skip-large", action="store_true", help="do not write publications_large.csv"
    )
    dist.add_argument(
        "--no-figures", action="store_true", help="do not render report figures"
    )
    dist.add_argument(
        "--memory-report",
        action="store_true",
        help="print peak resident memory to stderr when done",
    )
    dist.add_argument(
        "--completeness-threshold",
        type=float,
        default=0.0,
        help="fail validation if any column completeness drops below this (default: report-only)",
    )

    gen = sub.add_parser("generate", help="write a synthetic dump with a ground-truth manifest")
    gen.add_argument("--out", required=True, type=Path, help="directory for the dump")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--publications", type=int, default=1000)
    gen.add_argument("--relations", type=int, default=5000)
    gen.add_argument("--cites-fraction", type=float, default=0.8)
    gen.add_argument("--dangling-fraction", type=float, default=0.05)
    gen.add_argument("--duplicate-fraction", type=float, default=0.02)
    gen.add_argument("--parts", type=int, default=3, help="part files per folder")
    gen.add_argument(
        "--missing-rate",
        type=float,
        default=None,
        help="uniform missing-field probability for all optional columns",
    )
    gen.add_argument(
        "--missing",
        action="append",
        default=[],
        metavar="COLUMN=RATE",
        help="per-column missing-field probability (repeatable)",
    )
    gen.add_argument(
        "--no-manifest", action="store_true", help="skip the ground-truth manifest"
    )

    val = sub.add_parser("validate", help="re-check an existing output directory")
    val.add_argument("--output", required=True, type=Path, help="directory holding the outputs")
    val.add_argument("--completeness-threshold", type=float, default=0.0)

    return parser


def _peak_rss_bytes() -> int:
    """Peak resident memory of this process.

    Prefers /proc VmHWM, which the kernel resets at exec; getrusage's
    ru_maxrss is inherited from the parent across fork+exec, so a small
    tool spawned by a large process would misreport its own peak.
    """
    try:
        with open("/proc/self/status", "r", encoding="ascii") as handle:
            for line in handle:
                if line.startswith("VmHWM:"):
                    return int(line.split()[1]) * 1024
    except (OSError, ValueError, IndexError):
        pass
    import resource

    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def _cmd_distill(args: argparse.Namespace) -> int:
    options = DistillOptions(
        dedup_edges=args.dedup_edges,
        headers=args.headers,
        publications_format=args.publications_format,
        threads=args.threads,
        skip_large=args.skip_large,
        figures=not args.no_figures,
        completeness_threshold=args.completeness_threshold,
        progress=print_progress,
    )
    result = distill(args.input, args.output, options)
    for violation in result.violations:
        print(violation.to_json())
    if args.memory_report:
        print(f"peak_rss_bytes={_peak_rss_bytes()}", file=sys.stderr)
    if result.violations:
        print(
            f"validation failed with {len(result.violations)} violation(s)", file=sys.stderr
        )
        return EXIT_VALIDATION
    print_progress(
        f"done: {result.report.publications_kept} publications,"
        f" {result.report.edges_emitted} edges -> {result.output_dir}"
    )
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    missing = {}
    if args.missing_rate is not None:
        missing = {column: args.missing_rate for column in OPTIONAL_COLUMNS}
    for spec in args.missing:
        column, _, rate = spec.partition("=")
        if not rate:
            raise PipelineError(f"--missing expects COLUMN=RATE, got {spec!r}")
        missing[column] = float(rate)
    config = SynthConfig(
        seed=args.seed,
        n_publications=args.publications,
        n_relations=args.relations,
        cites_fraction=args.cites_fraction,
        dangling_fraction=args.dangling_fraction,
        duplicate_fraction=args.duplicate_fraction,
        missing_field_rates=missing,
        parts_per_folder=args.parts,
    )
    try:
        config.check()
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    generate(config, args.out, manifest=not args.no_manifest)
    print_progress(
        f"generated {config.n_publications} publications / {config.n_relations} relations"
        f" -> {args.out}"
    )
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    violations = run_validate(args.output, args.completeness_threshold)
    for violation in violations:
        print(violation.to_json())
    if violations:
        print(f"validation failed with {len(violations)} violation(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print_progress(f"validation passed: {args.output}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {"distill": _cmd_distill, "generate": _cmd_generate, "validate": _cmd_validate}
    try:
        return commands[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
