"""Command-line entry point: ``qattention {extract,fit,simulate,report}``.

Data goes to files or stdout, diagnostics to stderr. Exit status is 0 on
success and 2 on bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from collections import OrderedDict
from typing import Dict, List, Optional

from . import __version__
from .cascade import (
    DEFAULT_NMAX,
    BuildStats,
    aggregate_patterns,
    build_instances,
    read_patterns_csv,
    write_instances_csv,
    write_patterns_csv,
)
from .classical import PreconditionError, classical_report, fit_classical
from .ingest import PARSERS, ParseStats, read_corpus, write_corpus
from .quantum import QuantumFitConfig, fit_quantum, quantum_report
from .simulator import ground_truth_table, parse_config, simulate


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def format_report(values: Dict[str, object]) -> str:
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = repr(float(value))
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> Dict[str, str]:
    out = {}
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _read_inputs(paths: List[str], fmt: str, stats: ParseStats):
    records = []
    for path in paths:
        try:
            records.extend(read_corpus(path, fmt, stats))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return records


def _extract(records, n_max: int, out_dir: str, build: BuildStats):
    instances = build_instances(records, n_max, build)
    stats = aggregate_patterns(instances, n_max)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "instances.csv"), "w", encoding="utf-8") as fh:
        write_instances_csv(instances, fh)
    with open(os.path.join(out_dir, "patterns.csv"), "w", encoding="utf-8") as fh:
        write_patterns_csv(stats, fh)
    return instances, stats


def _fit(stats, model: str, seed: int) -> Dict[str, object]:
    values: Dict[str, object] = OrderedDict()
    fits = {}
    if model in ("classical", "both"):
        fits["classical"] = fit_classical(stats)
        values.update(classical_report(fits["classical"]))
    if model in ("quantum", "both"):
        fits["quantum"] = fit_quantum(stats, QuantumFitConfig(seed=seed))
        values.update(quantum_report(fits["quantum"]))
    return values


def cmd_extract(args) -> int:
    parse_stats, build = ParseStats(), BuildStats()
    records = _read_inputs(args.inputs, args.format, parse_stats)
    instances, stats = _extract(records, args.nmax, args.out, build)
    _log(f"records parsed: {parse_stats.parsed}  malformed: {parse_stats.malformed}")
    _log(
        f"instances built: {build.instances_total}  kept: {build.kept}  "
        f"dropped(n>{args.nmax}): {build.dropped_over_nmax}  dropped(no source): {build.dropped_no_source}  "
        f"clamped: {stats.clamped}  direct co-occurrence: {build.direct_cooccurrence}"
    )
    return 0


def cmd_fit(args) -> int:
    try:
        with open(args.stats, encoding="utf-8") as fh:
            stats = read_patterns_csv(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.stats}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise UsageError(f"malformed stats file {args.stats}: {exc}") from None
    try:
        values = _fit(stats, args.model, args.seed)
    except PreconditionError as exc:
        raise UsageError(f"stats file {args.stats}: {exc}") from None
    text = format_report(values)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror or exc}") from None
    if args.seed is not None:
        text += f"\nseed = {args.seed}\n"
    try:
        config = parse_config(text)
    except ValueError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    records = simulate(config)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_corpus(records, fh, args.format)
    _log(f"wrote {len(records)} tweets to {args.out}")
    print("n,expected_probability")
    for n, p in ground_truth_table(config).items():
        print(f"{n},{p!r}")
    return 0


def cmd_report(args) -> int:
    timings = OrderedDict()
    parse_stats, build = ParseStats(), BuildStats()
    t = time.perf_counter()
    records = _read_inputs(args.inputs, args.format, parse_stats)
    timings["parse"] = time.perf_counter() - t
    t = time.perf_counter()
    instances, stats = _extract(records, args.nmax, args.out, build)
    timings["extract"] = time.perf_counter() - t
    t = time.perf_counter()
    try:
        fit_values = _fit(stats, args.model, args.seed)
    except PreconditionError as exc:
        _log(f"fit skipped: {exc}")
        fit_values = {}
    timings["fit"] = time.perf_counter() - t
    with open(os.path.join(args.out, "fit.txt"), "w", encoding="utf-8") as fh:
        fh.write(format_report(fit_values))

    report = {
        "inputs": [
            {"path": p, "format": args.format, "sha256": _digest(p)} for p in args.inputs
        ],
        "counters": {
            "records_parsed": parse_stats.parsed,
            "records_malformed": parse_stats.malformed,
            "records_used": len(records),
            "instances_built": build.instances_total,
            "instances_kept": build.kept,
            "dropped_over_nmax": build.dropped_over_nmax,
            "dropped_no_source": build.dropped_no_source,
            "clamped": stats.clamped,
            "direct_cooccurrence": build.direct_cooccurrence,
            "excluded_self_reference": build.excluded_self_reference,
        },
        "patterns": [
            {
                "n": r.n,
                "instance_count": r.instance_count,
                "mean_probability": r.mean_probability,
                "std_error": r.std_error,
                "tweet_count": r.tweet_count,
            }
            for r in (stats.rows[n] for n in sorted(stats.rows))
        ],
        "fit": fit_values,
        "seconds": timings,
    }
    with open(os.path.join(args.out, "run_report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    _log(f"report written to {args.out}")
    return 0


def _digest(path: str) -> Optional[str]:
    if path == "-":
        return None
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qattention", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_args(p):
        p.add_argument("inputs", nargs="+", help="corpus files, '-' for stdin")
        p.add_argument("--format", choices=sorted(PARSERS), default="snap")
        p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)

    p = sub.add_parser("extract", help="build instance and pattern tables")
    corpus_args(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", help="fit classical and/or quantum models to a pattern table")
    p.add_argument("stats")
    p.add_argument("--model", choices=["classical", "quantum", "both"], default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report path (stdout if omitted)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="generate a synthetic corpus")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=sorted(PARSERS), default="snap")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="extract, fit and write a run report")
    corpus_args(p)
    p.add_argument("--model", choices=["classical", "quantum", "both"], default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "nmax", 1) < 1:
        parser.error("--nmax must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
