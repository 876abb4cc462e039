"""Command line front end: ``hamel-forge {build,verify,trace,stats}``.

Exit codes: 0 success, 1 check or construction failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from . import dump, verify
from .engine import (
    ASSERT_LEVELS,
    Config,
    ConstructionError,
    EngineState,
    Requirement,
    StageRecord,
    default_stream,
    run,
    run_stage,
)
from .freewords import enumerate_words, index_of, parse_word
from .qspace import format_scalar

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--generators", type=_positive, default=2, help="number of generators G")
    p.add_argument("--max-word-letters", type=_positive, default=3, dest="max_letters",
                   help="letter cap for enumerated words")
    p.add_argument("--stages", type=_non_negative, default=100)
    p.add_argument("--seed", type=int, default=0, help="stream seed")
    p.add_argument("--seed-symbols", type=_positive, default=1)
    p.add_argument("--snapshots", type=_non_negative, default=0, metavar="K",
                   help="retain a snapshot every K stages (0: none)")
    p.add_argument("--assert-level", choices=ASSERT_LEVELS, default="end")


def _config(args) -> Config:
    return Config(
        generators=args.generators,
        max_letters=args.max_letters,
        stages=args.stages,
        seed=args.seed,
        seed_symbols=args.seed_symbols,
        snapshot_every=args.snapshots,
        assert_level=args.assert_level,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamel-forge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="run the construction and write a state dump")
    _add_config(b)
    b.add_argument("--out", help="dump path (default: stdout)")
    b.add_argument("--format", choices=("text", "structured"), default="text")
    b.add_argument("--resume", metavar="DUMP", help="run the stream on top of a saved state")

    v = sub.add_parser("verify", help="re-check a dump (or a fresh build from the config flags)")
    v.add_argument("dump", nargs="?", help="state dump; omit to build in memory")
    _add_config(v)
    v.add_argument("--out", help="report path (default: stdout)")
    v.add_argument("--format", choices=("text", "structured"), default="text")
    v.add_argument("--allow-warn", action="store_true", help="exit 0 when checks only warn")

    t = sub.add_parser("trace", help="render step V of one stage")
    _add_config(t)
    t.add_argument("--stage", type=_non_negative, required=True, help="index into the stage log")
    t.add_argument("--word", help="replace the word of the traced stage, e.g. 'f1^1·f0^1'")

    s = sub.add_parser("stats", help="summarize a dump")
    s.add_argument("dump")
    return parser


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_construction_error(exc: ConstructionError) -> int:
    print(f"construction failure: {exc}", file=sys.stderr)
    trace = exc.trace
    if isinstance(trace, StageRecord):
        trace = trace.trace
    if trace is not None:
        print(render_trace_body(trace), file=sys.stderr)
    return EXIT_FAIL


def cmd_build(args) -> int:
    config = _config(args)
    state = None
    if args.resume:
        try:
            state = dump.load(args.resume)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except dump.DumpError as exc:
            print(f"error: {args.resume}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if state.G != config.generators:
            print(f"error: dump has G={state.G}, config has {config.generators}", file=sys.stderr)
            return EXIT_USAGE
    try:
        state = run(config, state=state)
    except ConstructionError as exc:
        return _report_construction_error(exc)
    try:
        _write(dump.dumps(state, args.format), args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def exit_status(reports: List[verify.Report], allow_warn: bool = False) -> int:
    ok = {verify.PASS, verify.WARN} if allow_warn else {verify.PASS}
    return EXIT_OK if all(r.status in ok for r in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.dump:
        try:
            state = dump.load(args.dump)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except dump.DumpError as exc:
            print(f"error: {args.dump}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        cap = state.max_letters
    else:
        try:
            state = run(_config(args))
        except ConstructionError as exc:
            return _report_construction_error(exc)
        cap = args.max_letters
    reports = verify.run_checks(state, cap)
    if args.format == "structured":
        text = json.dumps({"max_letters": cap, "checks": [r.to_dict() for r in reports]}, indent=1,
                          ensure_ascii=False) + "\n"
    else:
        text = verify.render(reports) + "\n"
    _write(text, args.out)
    return exit_status(reports, args.allow_warn)


def render_trace_body(trace) -> str:
    req = trace.requirement
    lines = []
    if trace.skipped:
        lines.append(f"STEP I: skipped: <0 | {req.x}> already in span of the graph of {trace.word}")
        for q, p in trace.witness:
            lines.append(f"  witness ({format_scalar(q)})*{p}")
        return "\n".join(lines)
    lines.append("STEP I: executed")
    lines.append(f"  x  = {trace.x}")
    lines.append(f"  y  = {trace.y}")
    lines.append(f"  y' = {trace.y_prime}")
    lines.append("  z  = " + ", ".join(map(str, trace.z)))
    lines.append("  r  = " + ", ".join(map(str, trace.r)))
    lines.append("  p  = " + ", ".join(map(str, trace.p)))
    lines.append(f"  {'block':<6}{'gen':<5}{'exp':<5}case")
    for j, g, n, pts in trace.blocks:
        case = "(b)" if n > 0 else "(a)"
        lines.append(f"  {j:<6}{g:<5}{n:<5}{case}")
        for pt in pts:
            lines.append(f"      f{g} += {pt}")
    return "\n".join(lines)


def render_trace(record: StageRecord) -> str:
    req = record.requirement
    lines = [f"stage {record.stage}: x={req.x} word={req.word_idx} [{record.trace.word}] gen={req.gen}",
             render_trace_body(record.trace)]
    lines.append(f"STEP II: {'skipped' if record.added_vi is None else f'f{req.gen} += {record.added_vi}'}")
    lines.append(f"STEP III: {'skipped' if record.added_vii is None else f'f{req.gen} += {record.added_vii}'}")
    return "\n".join(lines) + "\n"


def trace_stage(config: Config, stage: int, word_text: Optional[str] = None) -> StageRecord:
    """Run the default stream up to log entry ``stage`` and return its record.

    With ``word_text`` the word of that stage's requirement is replaced.
    """
    override = None
    if word_text is not None:
        w = parse_word(word_text)
        override = index_of(config.generators, w)
    state = EngineState.initial(config)
    for req in default_stream(config.generators, config.max_letters, config.stages, config.seed):
        if state.stage == stage and override is not None:
            req = Requirement(req.x, override, req.gen)
        record = run_stage(state, req, config.assert_level)
        if record is not None and record.stage == stage:
            return record
    raise IndexError(f"stage {stage} out of range: the run has {state.stage} stages")


def cmd_trace(args) -> int:
    try:
        record = trace_stage(_config(args), args.stage, args.word)
    except (IndexError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        return _report_construction_error(exc)
    sys.stdout.write(render_trace(record))
    return EXIT_OK


def stats(state: EngineState) -> dict:
    executed = [sum(not rec.skipped[i] for rec in state.log) for i in range(3)]
    points = [max(len(f.forward), len(f.backward)) for f in state.funcs]
    budget = verify.stage_budget(state.G, state.log)
    total = sum(points)
    return {
        "stages": state.stage,
        "executed": executed,
        "skipped": [state.stage - e for e in executed],
        "points": points,
        "total_points": total,
        "budget": budget,
        "utilization": (total / budget) if budget else 0.0,
        "words": len(enumerate_words(state.G, state.max_letters)) if state.G else 0,
        "max_letters": state.max_letters,
        "symbols": state.allocator.next_id,
    }


def cmd_stats(args) -> int:
    try:
        state = dump.load(args.dump)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except dump.DumpError as exc:
        print(f"error: {args.dump}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    st = stats(state)
    out = [f"stages: {st['stages']}"]
    for name, e, s in zip(dump.STEP_NAMES, st["executed"], st["skipped"]):
        out.append(f"  step {name}: executed {e}, skipped {s}")
    out.append(f"words: {st['words']} (max-letters={st['max_letters']})")
    out.append(f"symbols: {st['symbols']}")
    out.append(f"points: {st['total_points']}")
    for g, n in enumerate(st["points"]):
        out.append(f"  f{g}: {n}")
    out.append(f"budget: {st['total_points']} / {st['budget']} ({100 * st['utilization']:.1f}%)")
    print("\n".join(out))
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "trace": cmd_trace, "stats": cmd_stats}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
