"""Stage-by-stage construction of the generators.

Each stage takes a :class:`Requirement` ``(x, word index, generator)`` and
runs three steps on the per-generator partial functions:

* step V: unless ``<0, x>`` is already in the span of the word's graph, thread
  two chains of fresh points through the word so that it sends a fresh ``X`` to
  a fresh ``Y`` and ``-X`` to ``x - Y``; the two graph points then sum to
  ``<0, x>``.
* step VI: put ``x`` into the domain of the generator, mapping it to a fresh point.
* step VII: put ``x`` into the range of the generator, as the image of a fresh point.

Zero and limit stages need no code: the state starts empty and is cumulative.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .freewords import Word, enumerate_words, word_at
from .partialmaps import PartialFn, PartialMapError, eval_word, word_graph
from .qspace import PairVec, SpanBasis, SymbolAllocator, Vec

log = logging.getLogger(__name__)

ASSERT_LEVELS = ("stage", "end")


class ConstructionError(RuntimeError):
    """The construction broke one of its own invariants; always a bug."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class Requirement:
    x: Vec
    word_idx: int
    gen: int


@dataclass
class Config:
    generators: int
    max_letters: int
    stages: int
    seed: int = 0
    seed_symbols: int = 1
    snapshot_every: int = 0
    assert_level: str = "end"

    def validate(self) -> None:
        if self.generators < 1:
            raise ValueError("need at least one generator")
        if self.max_letters < 1:
            raise ValueError("max_letters must be at least 1")
        if self.stages < 0:
            raise ValueError("stages must be non-negative")
        if self.seed_symbols < 1:
            raise ValueError("need at least one seed symbol")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be non-negative")
        if self.assert_level not in ASSERT_LEVELS:
            raise ValueError(f"assert_level must be one of {ASSERT_LEVELS}")


@dataclass
class StepITrace:
    requirement: Requirement
    word: Word
    skipped: bool
    x: Optional[Vec] = None
    z: List[Vec] = field(default_factory=list)
    r: List[Vec] = field(default_factory=list)
    y: Optional[Vec] = None
    y_prime: Optional[Vec] = None
    p: List[int] = field(default_factory=list)
    # (block j, generator, exponent, inserted pairs) in insertion order
    blocks: List[Tuple[int, int, int, List[PairVec]]] = field(default_factory=list)
    fresh: List[int] = field(default_factory=list)
    # on skip: a representation of <0, x> over the word's graph
    witness: List[Tuple[object, PairVec]] = field(default_factory=list)

    @property
    def added(self) -> Dict[int, List[PairVec]]:
        out: Dict[int, List[PairVec]] = {}
        for _, g, _, pts in self.blocks:
            out.setdefault(g, []).extend(pts)
        return out

    @property
    def insert_count(self) -> int:
        return sum(len(pts) for *_, pts in self.blocks)


@dataclass
class StageRecord:
    stage: int
    requirement: Requirement
    skipped: Tuple[bool, bool, bool]
    trace: Optional[StepITrace] = None
    added_vi: Optional[PairVec] = None
    added_vii: Optional[PairVec] = None

    @property
    def insert_count(self) -> int:
        n = self.trace.insert_count if self.trace is not None else 0
        return n + (self.added_vi is not None) + (self.added_vii is not None)


class WordSpans:
    """Per-word spans of word graphs, grown incrementally.

    Word graphs only grow as the generators grow, so inserting the new graph
    points into the previous span gives the span of the current graph, and a
    dependent insert is exactly a failure of linear independence.
    """

    def __init__(self):
        self._cache: Dict[Word, Tuple[set, SpanBasis]] = {}

    def span(self, funcs: Sequence[PartialFn], w: Word) -> SpanBasis:
        points = word_graph(funcs, w)
        seen, basis = self._cache.get(w, (None, None))
        current = set(points)
        if seen is None or not seen <= current:
            seen, basis = set(), SpanBasis(track=True)
        for pt in points:
            if pt not in seen:
                if not basis.insert(pt):
                    raise ConstructionError(f"graph of {w} is linearly dependent at {pt}")
                seen.add(pt)
        self._cache[w] = (seen, basis)
        return basis

    def clear(self) -> None:
        self._cache.clear()


@dataclass
class EngineState:
    G: int
    max_letters: int
    funcs: Tuple[PartialFn, ...]
    allocator: SymbolAllocator
    seed_symbols: int = 1
    log: List[StageRecord] = field(default_factory=list)
    snapshots: List[Tuple[int, Tuple[PartialFn, ...]]] = field(default_factory=list)
    snapshot_every: int = 0
    seed: int = 0
    spans: WordSpans = field(default_factory=WordSpans, repr=False, compare=False)

    @classmethod
    def initial(cls, config: Config) -> "EngineState":
        config.validate()
        return cls(
            G=config.generators,
            max_letters=config.max_letters,
            funcs=tuple(PartialFn() for _ in range(config.generators)),
            allocator=SymbolAllocator(config.seed_symbols),
            seed_symbols=config.seed_symbols,
            snapshot_every=config.snapshot_every,
            seed=config.seed,
        )

    @property
    def stage(self) -> int:
        return len(self.log)

    def word(self, idx: int) -> Word:
        return word_at(self.G, idx)

    def total_points(self) -> int:
        return sum(len(f) for f in self.funcs)

    def _set(self, g: int, f: PartialFn) -> None:
        funcs = list(self.funcs)
        funcs[g] = f
        self.funcs = tuple(funcs)


def _check_requirement(state: EngineState, req: Requirement) -> None:
    if not 0 <= req.gen < state.G:
        raise ValueError(f"generator {req.gen} outside 0..{state.G - 1}")
    if req.word_idx < 0:
        raise ValueError(f"negative word index {req.word_idx}")


def _witness(span: SpanBasis, target: PairVec) -> List[Tuple[object, PairVec]]:
    coeffs = span.represent(target)
    return [(q, pt) for q, pt in zip(coeffs, span.generators) if q]


def step_v(state: EngineState, req: Requirement) -> StepITrace:
    """Put ``<0, req.x>`` into the span of the graph of word ``req.word_idx``."""
    _check_requirement(state, req)
    w = state.word(req.word_idx)
    target = PairVec(Vec.zero(), req.x)
    span = state.spans.span(state.funcs, w)
    if span.contains(target):
        return StepITrace(req, w, skipped=True, witness=_witness(span, target))

    alloc = state.allocator
    s = w.letter_count
    first = alloc.next_id
    x = alloc.fresh()
    z = [x] + [alloc.fresh() for _ in range(s - 1)]
    r = [-x] + [alloc.fresh() for _ in range(s - 1)]
    y = alloc.fresh()
    y_prime = req.x - y
    z.append(y)
    r.append(y_prime)
    p = [0]
    for _, n in w:
        p.append(p[-1] + abs(n))

    trace = StepITrace(req, w, skipped=False, x=x, z=z, r=r, y=y, y_prime=y_prime, p=p,
                       fresh=list(range(first, alloc.next_id)))
    for j, (g, n) in enumerate(w):
        lo, hi = p[j], p[j + 1]
        if n > 0:
            pairs = [(z[t], z[t + 1]) for t in range(lo, hi)] + [(r[t], r[t + 1]) for t in range(lo, hi)]
        else:
            pairs = [(z[t + 1], z[t]) for t in range(lo, hi)] + [(r[t + 1], r[t]) for t in range(lo, hi)]
        f = state.funcs[g]
        try:
            for a, b in pairs:
                f = f.insert(a, b)
        except PartialMapError as exc:
            raise ConstructionError(f"step V, block {j} of {w}: {exc}", trace) from exc
        state._set(g, f)
        trace.blocks.append((j, g, n, [PairVec(a, b) for a, b in pairs]))

    if eval_word(state.funcs, w, x) != y or eval_word(state.funcs, w, -x) != y_prime:
        raise ConstructionError(f"step V chains do not realize {w}", trace)
    if not state.spans.span(state.funcs, w).contains(target):
        raise ConstructionError(f"step V left <0, {req.x}> outside the span of {w}", trace)
    return trace


def step_vi(state: EngineState, req: Requirement) -> Optional[PairVec]:
    """Put ``req.x`` into the domain of generator ``req.gen``; the added point or None."""
    _check_requirement(state, req)
    f = state.funcs[req.gen]
    if f.in_dom(req.x):
        return None
    y = state.allocator.fresh()
    try:
        state._set(req.gen, f.insert(req.x, y))
    except PartialMapError as exc:
        raise ConstructionError(f"step VI: {exc}") from exc
    return PairVec(req.x, y)


def step_vii(state: EngineState, req: Requirement) -> Optional[PairVec]:
    """Put ``req.x`` into the range of generator ``req.gen``; the added point or None."""
    _check_requirement(state, req)
    f = state.funcs[req.gen]
    if f.in_rng(req.x):
        return None
    x = state.allocator.fresh()
    try:
        state._set(req.gen, f.insert(x, req.x))
    except PartialMapError as exc:
        raise ConstructionError(f"step VII: {exc}") from exc
    return PairVec(x, req.x)


def assert_plif(state: EngineState, max_letters: Optional[int] = None) -> int:
    """Raise ConstructionError unless every word graph up to the cap is independent."""
    words = enumerate_words(state.G, max_letters or state.max_letters)
    for w in words:
        state.spans.span(state.funcs, w)
    return len(words)


def run_stage(state: EngineState, req: Requirement, assert_level: str = "end") -> Optional[StageRecord]:
    """Run steps V, VI, VII for one requirement.

    A requirement whose three steps all skip leaves the state untouched and
    is not logged; otherwise the stage is appended to the log.
    """
    state.allocator.ensure(req.x.max_symbol() + 1)
    trace = step_v(state, req)
    added_vi = step_vi(state, req)
    added_vii = step_vii(state, req)
    skipped = (trace.skipped, added_vi is None, added_vii is None)
    if all(skipped):
        return None
    record = StageRecord(state.stage, req, skipped, trace, added_vi, added_vii)
    budget = 2 * trace.word.letter_count + 2
    if record.insert_count > budget:
        raise ConstructionError(f"stage {record.stage} inserted {record.insert_count} > {budget} points", trace)
    state.log.append(record)
    if state.snapshot_every and state.stage % state.snapshot_every == 0:
        state.snapshots.append((record.stage, state.funcs))
    if assert_level == "stage":
        try:
            assert_plif(state)
        except ConstructionError as exc:
            exc.trace = record
            raise
    return record


def default_stream(G: int, max_letters: int, num_stages: int, seed: int = 0) -> List[Requirement]:
    """A fair, seeded schedule of requirements.

    Pool points are the symbols ``s0, s1, ...`` in creation order (injected
    seed symbols come first).  Each point receives ``max(W, G)`` consecutive
    requirements, where ``W`` is the number of words, so every word index and
    every generator is paired with it; the seed permutes the order within
    each point's block.
    """
    if G < 1 or max_letters < 1 or num_stages < 0:
        raise ValueError("need G >= 1, max_letters >= 1, num_stages >= 0")
    W = len(enumerate_words(G, max_letters))
    rounds = max(W, G)
    rng = random.Random(seed)
    out: List[Requirement] = []
    point = 0
    while len(out) < num_stages:
        words = rng.sample(range(W), W)
        gens = rng.sample(range(G), G)
        x = Vec.symbol(point)
        for j in range(rounds):
            if len(out) == num_stages:
                break
            out.append(Requirement(x, words[j % W], gens[j % G]))
        point += 1
    return out


def run(config: Config, stream: Optional[Iterable[Requirement]] = None,
        state: Optional[EngineState] = None) -> EngineState:
    """Fold :func:`run_stage` over ``stream`` (default: :func:`default_stream`).

    ``state`` resumes from an existing state instead of the empty one.
    """
    config.validate()
    if state is None:
        state = EngineState.initial(config)
    if stream is None:
        stream = default_stream(config.generators, config.max_letters, config.stages, config.seed)
    for req in stream:
        run_stage(state, req, config.assert_level)
    assert_plif(state)
    log.debug("run finished: %d stages, %d points, %d symbols",
              state.stage, state.total_points(), state.allocator.next_id)
    return state
