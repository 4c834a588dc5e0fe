"""Command line: construct, analyze, project, sweep, report.

Exit status is 0 on success, 1 when a checked invariant fails (s > 2,
oracle mismatch, projection not preserving the configuration, duplicate
input lines) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import compute_stats
from .construction import DEFAULT_PAIR_CAP, ConstructionParams, Profile, enumerate_lines, parse_alpha
from .lineset import DuplicateLineError, LineFormatError, parse_header, read_lines, write_lines
from .projection import ProjectionError, find_generic_projection, report_text, write_witness
from .reporting import SweepRecord, build_report, emit, load_records

OUT_ENV = "INCIDENCE_FORGE_OUT"

log = logging.getLogger("incidence_forge")


class InvariantError(Exception):
    pass


class UsageError(Exception):
    pass


def _k_values(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split(".."))
            ks = list(range(a, b + 1))
        else:
            ks = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad k value {text!r}") from None
    if not ks or min(ks) < 1:
        raise UsageError("k must be a positive integer")
    return ks


def _params(args, k: int) -> ConstructionParams:
    p, q = parse_alpha(args.alpha)
    return ConstructionParams(k, p, q, Profile.parse(args.profile), args.pair_cap)


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(OUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _stem(params: ConstructionParams) -> str:
    pr = params.profile
    return f"k{params.k}_a{params.p}-{params.q}_p{pr.c_small}-{pr.c_big}"


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _check_stats(stats) -> None:
    if stats.s is not None and stats.s > 2:
        raise InvariantError(f"2-flat richness s = {stats.s} exceeds 2")


def _params_from_header(header: str, args) -> ConstructionParams:
    h = parse_header(header)
    prof = Profile(h["c_small"], h["c_big"])
    return ConstructionParams(h["k"], h["p"], h["q"], prof, args.pair_cap)


def cmd_construct(args) -> int:
    params = _params(args, _k_values(args.k)[0])
    lines = enumerate_lines(params, args.workers)
    out = _out_dir(args)
    write_lines(out / f"lines_{_stem(params)}.txt", lines, params.header())
    stats = compute_stats(params, lines, oracle=args.oracle, richness=not args.no_richness)
    _write_json(out / f"stats_{_stem(params)}.json", stats.to_json())
    print(json.dumps(stats.to_json(), sort_keys=True))
    _check_stats(stats)
    return 0


def cmd_analyze(args) -> int:
    if not args.input:
        raise UsageError("analyze needs --input")
    header, lines = read_lines(args.input)
    params = _params_from_header(header, args)
    stats = compute_stats(params, lines, oracle=args.oracle, richness=not args.no_richness)
    if args.out:
        _write_json(_out_dir(args) / f"stats_{_stem(params)}.json", stats.to_json())
    print(json.dumps(stats.to_json(), sort_keys=True))
    _check_stats(stats)
    return 0


def cmd_project(args) -> int:
    if not args.input:
        raise UsageError("project needs --input")
    header, lines = read_lines(args.input)
    params = _params_from_header(header, args)
    try:
        rep, rows3 = find_generic_projection(lines, params, args.seed)
    except ProjectionError as e:
        raise InvariantError(str(e)) from e
    out = _out_dir(args)
    stem = f"{_stem(params)}_s{args.seed}"
    write_witness(out / f"lines3_{stem}.txt", rows3, rep)
    (out / f"projection_{stem}.json").write_text(report_text(rep))
    print(report_text(rep), end="")
    return 0


def cmd_sweep(args) -> int:
    records = []
    for k in _k_values(args.k):
        params = _params(args, k)
        lines = enumerate_lines(params, args.workers)
        stats = compute_stats(params, lines, oracle=args.oracle, richness=not args.no_richness)
        log.info("k=%d n=%d I=%d s=%s q=%s", k, stats.n, stats.I, stats.s, stats.q_rich)
        _check_stats(stats)
        records.append(SweepRecord.build(stats))
    out = _out_dir(args)
    p, q = parse_alpha(args.alpha)
    stem = f"sweep_a{p}-{q}_p{Profile.parse(args.profile)}".replace(",", "-")
    emit(records, "json", out / f"{stem}.json")
    emit(records, "csv", out / f"{stem}.csv")
    print(out / f"{stem}.json")
    return 0


def cmd_report(args) -> int:
    if not args.input:
        raise UsageError("report needs --input")
    records = load_records(args.input)
    rep = build_report(records)
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    if args.out:
        (_out_dir(args) / f"report_{Path(args.input).stem}.json").write_text(text)
    print(text, end="")
    return 0


COMMANDS = {
    "construct": cmd_construct,
    "analyze": cmd_analyze,
    "project": cmd_project,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="incidence-forge", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--k", default="1", help="k, or for sweep a range a..b or a list a,b,c")
    ap.add_argument("--alpha", default="1/1", help="alpha as p/q")
    ap.add_argument("--profile", default="reduced", help="paper, reduced, or cs,cb")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--oracle", action="store_true", help="recheck incidences by brute force")
    ap.add_argument("--pair-cap", type=int, default=DEFAULT_PAIR_CAP)
    ap.add_argument("--no-richness", action="store_true", help="skip s and q")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    ap.add_argument("--input", help="input file for analyze, project, report")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.workers < 1:
            raise UsageError("workers must be positive")
        return COMMANDS[args.command](args)
    except (UsageError, LineFormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (InvariantError, DuplicateLineError, AssertionError) as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
