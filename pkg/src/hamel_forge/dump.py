"""Plain-text and JSON state dumps.

Text layout::

    hamel-forge v1 G=<G> stages=<N>
    config: max-letters=<L> seed=<seed> seed-symbols=<S> symbols=<next id> snapshot-every=<K>
    gen 0:
      <v | w>
    ...
    log:
      <k>: x=<vec> word=<idx> [<word text>] gen=<g> skip=<I,II,III or ->
    snapshot <k>:
    gen 0:
      <v | w>
    ...

Graph lines are sorted by the text of the first component.  The JSON form
carries the same fields.
"""

from __future__ import annotations

import json
import re
from typing import List, Tuple

from .engine import EngineState, Requirement, StageRecord
from .freewords import parse_word, word_at
from .partialmaps import PartialFn, format_graph
from .qspace import SymbolAllocator, parse_pair, parse_vec

MAGIC = "hamel-forge"
VERSION = 1
STEP_NAMES = ("I", "II", "III")


class DumpError(ValueError):
    def __init__(self, message: str, lineno: int = 0):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


def _skip_text(skipped) -> str:
    names = [n for n, s in zip(STEP_NAMES, skipped) if s]
    return ",".join(names) or "-"


def _gen_sections(funcs) -> List[str]:
    lines = []
    for g, f in enumerate(funcs):
        lines.append(f"gen {g}:")
        lines.extend(format_graph(f.graph()))
    return lines


def dumps_text(state: EngineState) -> str:
    lines = [
        f"{MAGIC} v{VERSION} G={state.G} stages={state.stage}",
        f"config: max-letters={state.max_letters} seed={state.seed} seed-symbols={state.seed_symbols} "
        f"symbols={state.allocator.next_id} snapshot-every={state.snapshot_every}",
    ]
    lines += _gen_sections(state.funcs)
    lines.append("log:")
    for rec in state.log:
        req = rec.requirement
        w = word_at(state.G, req.word_idx)
        lines.append(f"  {rec.stage}: x={req.x} word={req.word_idx} [{w}] gen={req.gen} "
                     f"skip={_skip_text(rec.skipped)}")
    for k, funcs in state.snapshots:
        lines.append(f"snapshot {k}:")
        lines += _gen_sections(funcs)
    return "\n".join(lines) + "\n"


def _graph_json(funcs) -> list:
    return [[[str(x), str(y)] for x, y in sorted(f.pairs(), key=lambda p: (str(p[0]), str(p[1])))]
            for f in funcs]


def dumps_structured(state: EngineState) -> str:
    doc = {
        "format": MAGIC,
        "version": VERSION,
        "G": state.G,
        "stages": state.stage,
        "config": {
            "max-letters": state.max_letters,
            "seed": state.seed,
            "seed-symbols": state.seed_symbols,
            "symbols": state.allocator.next_id,
            "snapshot-every": state.snapshot_every,
        },
        "gens": _graph_json(state.funcs),
        "log": [
            {
                "stage": rec.stage,
                "x": str(rec.requirement.x),
                "word": rec.requirement.word_idx,
                "word_text": str(word_at(state.G, rec.requirement.word_idx)),
                "gen": rec.requirement.gen,
                "skip": dict(zip(STEP_NAMES, rec.skipped)),
            }
            for rec in state.log
        ],
        "snapshots": [{"stage": k, "gens": _graph_json(funcs)} for k, funcs in state.snapshots],
    }
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def dumps(state: EngineState, fmt: str = "text") -> str:
    if fmt == "text":
        return dumps_text(state)
    if fmt == "structured":
        return dumps_structured(state)
    raise ValueError(f"unknown dump format {fmt!r}")


_HEADER = re.compile(rf"{MAGIC} v(\d+) G=(\d+) stages=(\d+)")
_CONFIG = re.compile(r"config: max-letters=(\d+) seed=(-?\d+) seed-symbols=(\d+) symbols=(\d+) snapshot-every=(\d+)")
_GEN = re.compile(r"gen (\d+):")
_SNAP = re.compile(r"snapshot (\d+):")
_LOG = re.compile(r"  (\d+): x=(\S+) word=(\d+) \[([^\]]*)\] gen=(\d+) skip=(\S+)")


def _parse_skip(text: str, lineno: int) -> Tuple[bool, bool, bool]:
    names = set() if text == "-" else set(text.split(","))
    if not names <= set(STEP_NAMES):
        raise DumpError(f"bad skip flags {text!r}", lineno)
    return tuple(n in names for n in STEP_NAMES)


def _build_state(G, stages, max_letters, seed, seed_symbols, symbols, snapshot_every,
                 gens, log, snapshots, lineno=0) -> EngineState:
    if len(gens) != G:
        raise DumpError(f"expected {G} generator sections, found {len(gens)}", lineno)
    if len(log) != stages:
        raise DumpError(f"header says {stages} stages but the log has {len(log)}", lineno)
    return EngineState(
        G=G,
        max_letters=max_letters,
        funcs=tuple(PartialFn.unchecked(pairs) for pairs in gens),
        allocator=SymbolAllocator(symbols),
        seed_symbols=seed_symbols,
        log=log,
        snapshots=[(k, tuple(PartialFn.unchecked(p) for p in fs)) for k, fs in snapshots],
        snapshot_every=snapshot_every,
        seed=seed,
    )


def loads_text(text: str) -> EngineState:
    lines = text.splitlines()
    if not lines:
        raise DumpError("empty dump", 1)
    m = _HEADER.fullmatch(lines[0])
    if m is None:
        raise DumpError(f"bad header {lines[0]!r}", 1)
    if int(m.group(1)) != VERSION:
        raise DumpError(f"unsupported version {m.group(1)}", 1)
    G, stages = int(m.group(2)), int(m.group(3))
    if len(lines) < 2 or (c := _CONFIG.fullmatch(lines[1])) is None:
        raise DumpError("missing or malformed config line", 2)
    max_letters, seed, seed_symbols, symbols, snapshot_every = (int(v) for v in c.groups())

    gens: List[list] = []
    log: List[StageRecord] = []
    snapshots: List[Tuple[int, List[list]]] = []
    target = gens  # where gen sections go
    section = None
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        if (g := _GEN.fullmatch(line)) is not None:
            if int(g.group(1)) != len(target):
                raise DumpError(f"generator sections out of order at {line!r}", lineno)
            target.append([])
            section = "gen"
        elif line == "log:":
            if snapshots or section == "log" or log:
                raise DumpError("log section out of place", lineno)
            section = "log"
        elif (s := _SNAP.fullmatch(line)) is not None:
            snapshots.append((int(s.group(1)), []))
            target = snapshots[-1][1]
            section = None
        elif section == "gen" and line.startswith("  <"):
            try:
                p = parse_pair(line)
            except ValueError as exc:
                raise DumpError(str(exc), lineno) from None
            target[-1].append((p.first, p.second))
        elif section == "log" and (e := _LOG.fullmatch(line)) is not None:
            try:
                x = parse_vec(e.group(2))
                word_text = parse_word(e.group(4))
            except ValueError as exc:
                raise DumpError(str(exc), lineno) from None
            idx, gen = int(e.group(3)), int(e.group(5))
            if word_at(G, idx) != word_text:
                raise DumpError(f"word index {idx} is {word_at(G, idx)}, not {word_text}", lineno)
            if gen >= G:
                raise DumpError(f"generator {gen} out of range", lineno)
            if int(e.group(1)) != len(log):
                raise DumpError(f"log stage {e.group(1)} out of sequence", lineno)
            log.append(StageRecord(len(log), Requirement(x, idx, gen), _parse_skip(e.group(6), lineno)))
        else:
            raise DumpError(f"unexpected line {line!r}", lineno)
    for k, fs in snapshots:
        if len(fs) != G:
            raise DumpError(f"snapshot {k} has {len(fs)} generator sections, expected {G}")
    return _build_state(G, stages, max_letters, seed, seed_symbols, symbols, snapshot_every,
                        gens, log, snapshots, len(lines))


def loads_structured(text: str) -> EngineState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DumpError(exc.msg, exc.lineno) from None
    try:
        if doc["format"] != MAGIC or doc["version"] != VERSION:
            raise DumpError("not a hamel-forge v1 dump")
        G = doc["G"]
        cfg = doc["config"]

        def gens_of(raw):
            return [[(parse_vec(x), parse_vec(y)) for x, y in pairs] for pairs in raw]

        log = []
        for i, e in enumerate(doc["log"]):
            req = Requirement(parse_vec(e["x"]), e["word"], e["gen"])
            if e["stage"] != i or e["gen"] >= G:
                raise DumpError(f"bad log entry {i}")
            log.append(StageRecord(i, req, tuple(bool(e["skip"][n]) for n in STEP_NAMES)))
        snaps = [(s["stage"], gens_of(s["gens"])) for s in doc["snapshots"]]
        for k, fs in snaps:
            if len(fs) != G:
                raise DumpError(f"snapshot {k} has {len(fs)} generator sections, expected {G}")
        return _build_state(G, doc["stages"], cfg["max-letters"], cfg["seed"], cfg["seed-symbols"],
                            cfg["symbols"], cfg["snapshot-every"], gens_of(doc["gens"]), log, snaps)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DumpError):
            raise
        raise DumpError(f"malformed structured dump: {exc}") from None


def loads(text: str) -> EngineState:
    if text.lstrip().startswith("{"):
        return loads_structured(text)
    return loads_text(text)


def load(path) -> EngineState:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(state: EngineState, path, fmt: str = "text") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state, fmt))
