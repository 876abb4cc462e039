"""Independent re-checks of a constructed state.

Every check recomputes word graphs and spans from the raw generator maps;
apart from the requirement log nothing recorded by the engine is trusted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .freewords import Word, enumerate_words, word_at
from .partialmaps import PartialFn, eval_word, word_graph
from .qspace import PairVec, Vec, dependency_witness, format_scalar, is_plif, span_of

PASS, FAIL, WARN = "PASS", "FAIL", "WARN"


@dataclass
class Report:
    name: str
    status: str = PASS
    counts: Dict[str, int] = field(default_factory=dict)
    witnesses: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    # structured per-item results, e.g. condition (V) representations
    details: List[dict] = field(default_factory=list)
    elapsed: float = field(default=0.0, compare=False)

    def fail(self, witness: str) -> None:
        self.status = FAIL
        self.witnesses.append(witness)

    def warn(self, message: str) -> None:
        if self.status == PASS:
            self.status = WARN
        self.warnings.append(message)

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def line(self) -> str:
        counts = ", ".join(f"{k}={v}" for k, v in self.counts.items())
        return f"CHECK {self.name}: {self.status} ({counts})"

    def render(self) -> str:
        lines = [self.line()]
        lines += [f"    {w}" for w in self.witnesses]
        lines += [f"    warning: {w}" for w in self.warnings]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "counts": dict(self.counts),
            "witnesses": list(self.witnesses),
            "warnings": list(self.warnings),
            "details": list(self.details),
            "elapsed_ms": round(self.elapsed * 1000, 3),
        }


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        report = fn(*args, **kwargs)
        report.elapsed = time.perf_counter() - t0
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def format_combination(terms: Iterable[Tuple[object, PairVec]]) -> str:
    return " + ".join(f"({format_scalar(q)})*{p}" for q, p in terms)


@_timed
def check_plif_all(state, max_letters: int) -> Report:
    """Every word graph with at most ``max_letters`` letters is Q-linearly independent."""
    report = Report("plif_all")
    words = enumerate_words(state.G, max_letters)
    points = 0
    for w in words:
        graph = word_graph(state.funcs, w)
        points += len(graph)
        if not is_plif(graph):
            dep = dependency_witness(graph)
            report.fail(f"word {w}: {format_combination(dep)} = 0")
            report.details.append({"word": str(w), "combination": [[format_scalar(q), str(p)] for q, p in dep]})
    report.counts = {"words": len(words), "points": points, "max_letters": max_letters}
    return report


@_timed
def check_injective(state) -> Report:
    """Each generator map is one-to-one: forward and backward indexes agree."""
    report = Report("injective")
    pairs = 0
    for g, f in enumerate(state.funcs):
        pairs += len(f.forward)
        for x, y in sorted(f.forward.items()):
            x2 = f.backward.get(y)
            if x2 != x:
                other = f"<{x2} | {y}>" if x2 is not None else "no backward entry"
                report.fail(f"f{g}: <{x} | {y}> collides with {other}")
        for y, x in sorted(f.backward.items()):
            y2 = f.forward.get(x)
            if y2 != y:
                other = f"<{x} | {y2}>" if y2 is not None else "no forward entry"
                report.fail(f"f{g}: backward <{x} | {y}> collides with {other}")
    report.counts = {"generators": len(state.funcs), "pairs": pairs}
    return report


def stage_budget(G: int, log: Sequence) -> int:
    return sum(2 * word_at(G, rec.requirement.word_idx).letter_count + 2 for rec in log)


@_timed
def check_growth(state) -> Report:
    """Total graph size stays within the per-stage budget of ``2s + 2`` points."""
    report = Report("growth")
    total = sum(max(len(f.forward), len(f.backward)) for f in state.funcs)
    budget = stage_budget(state.G, state.log)
    if total > budget:
        report.fail(f"total graph size {total} exceeds budget {budget} over {len(state.log)} stages")
    report.counts = {"points": total, "budget": budget, "stages": len(state.log)}
    return report


@_timed
def check_monotone(snapshots: Sequence[Sequence[PartialFn]]) -> Report:
    """Consecutive snapshots are literal subsets of one another, per generator."""
    report = Report("monotone")
    for i in range(1, len(snapshots)):
        before, after = snapshots[i - 1], snapshots[i]
        if len(before) != len(after):
            report.fail(f"snapshot {i}: generator count changed {len(before)} -> {len(after)}")
            continue
        for g, (a, b) in enumerate(zip(before, after)):
            for x, y in sorted(a.forward.items()):
                if b.forward.get(x) != y:
                    report.fail(f"snapshot {i}: f{g} lost <{x} | {y}>")
    report.counts = {"snapshots": len(snapshots)}
    return report


class _GraphSpans:
    # tracked spans of final word graphs, one per word
    def __init__(self, funcs):
        self.funcs = funcs
        self._spans = {}

    def get(self, w: Word):
        if w not in self._spans:
            self._spans[w] = span_of(word_graph(self.funcs, w), track=True)
        return self._spans[w]


@_timed
def check_condition_v(state) -> Report:
    """For every logged requirement, ``<0, x>`` lies in the span of its word's graph."""
    report = Report("condition_v")
    spans = _GraphSpans(state.funcs)
    for rec in state.log:
        req = rec.requirement
        w = word_at(state.G, req.word_idx)
        span = spans.get(w)
        target = PairVec(Vec.zero(), req.x)
        coeffs = span.represent(target)
        if coeffs is None:
            report.fail(f"stage {rec.stage}: <0 | {req.x}> not in span of the graph of {w} "
                        f"({len(span.generators)} points)")
            continue
        terms = [(q, p) for q, p in zip(coeffs, span.generators) if q]
        report.details.append({
            "stage": rec.stage,
            "word": str(w),
            "x": str(req.x),
            "combination": [[format_scalar(q), str(p)] for q, p in terms],
        })
    report.counts = {"requirements": len(state.log)}
    return report


@_timed
def check_dom_rng(state) -> Report:
    """Every logged ``x`` is in both the domain and the range of its generator."""
    report = Report("dom_rng")
    for rec in state.log:
        req = rec.requirement
        f = state.funcs[req.gen] if req.gen < len(state.funcs) else PartialFn()
        if not f.in_dom(req.x):
            report.fail(f"stage {rec.stage}: {req.x} not in dom(f{req.gen})")
        if not f.in_rng(req.x):
            report.fail(f"stage {rec.stage}: {req.x} not in rng(f{req.gen})")
    report.counts = {"requirements": len(state.log)}
    return report


def separation_witness(funcs, w: Word) -> Optional[PairVec]:
    for p in word_graph(funcs, w):
        if p.first != p.second:
            return p
    return None


@_timed
def check_separation(state, max_letters: int) -> Report:
    """Words that received an executed step V move some point, so they are not the identity.

    Words never served by an executed step V may legitimately be unseparated
    at finite scale; those produce warnings instead of failures.
    """
    report = Report("separation")
    words = enumerate_words(state.G, max_letters)
    served = {rec.requirement.word_idx for rec in state.log if not rec.skipped[0]}
    empty = not any(len(f) for f in state.funcs)
    separated = 0
    for idx, w in enumerate(words):
        p = separation_witness(state.funcs, w)
        if p is not None:
            separated += 1
            report.details.append({"word": str(w), "witness": str(p)})
        elif idx in served:
            report.fail(f"word {w} received step V but fixes every point of its domain")
        elif not empty:
            report.warn(f"word {w} unseparated (insufficient stages)")
    report.counts = {"words": len(words), "separated": separated, "max_letters": max_letters}
    return report


def hamel_defect(state, target: Union[Word, int], points: Iterable[Vec]) -> Set[Vec]:
    """Points ``x`` with ``<0, x>`` outside the span of the target's graph."""
    w = Word([(target, 1)]) if isinstance(target, int) else target
    span = span_of(word_graph(state.funcs, w))
    return {x for x in points if not span.contains(PairVec(Vec.zero(), x))}


def run_checks(state, max_letters: Optional[int] = None,
               snapshots: Optional[Sequence[Sequence[PartialFn]]] = None) -> List[Report]:
    """Run the full suite; ``snapshots`` defaults to the state's retained ones plus the final maps."""
    cap = max_letters or state.max_letters
    if snapshots is None:
        snapshots = [funcs for _, funcs in state.snapshots] + [state.funcs]
    return [
        check_plif_all(state, cap),
        check_injective(state),
        check_growth(state),
        check_monotone(snapshots),
        check_condition_v(state),
        check_dom_rng(state),
        check_separation(state, cap),
    ]


def render(reports: Sequence[Report]) -> str:
    return "\n".join(r.render() for r in reports)
