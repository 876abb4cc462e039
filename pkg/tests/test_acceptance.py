"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line straight to the terminal (also under pytest capture).  The module
can be run directly too::

    python tests/test_acceptance.py
"""

import contextlib
import io
import itertools
import os
import random
import re
import sys
import tempfile
import time
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hamel_forge import cli, dump, verify  # noqa: E402
from hamel_forge.engine import Config, EngineState, default_stream, run, step_v, step_vi, step_vii  # noqa: E402
from hamel_forge.freewords import IDENTITY, concat, enumerate_words, inverse  # noqa: E402
from hamel_forge.partialmaps import PartialFn  # noqa: E402
from hamel_forge.qspace import PairVec, Vec, is_plif, parse_pair, span_contains, span_of  # noqa: E402

from oracles import brute_force_words, dense_contains, dense_independent, word_order_key  # noqa: E402

SIX = ("plif_all", "injective", "growth", "monotone", "condition_v", "dom_rng")


def quiet_main(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def parse_report(text):
    return dict(re.findall(r"^CHECK (\w+): (\w+)", text, re.M))


# -- 1 --------------------------------------------------------------------------

def criterion_1():
    problems, runs = [], 0
    start = time.time()
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.txt")
        for G, L, N, seed in itertools.product((1, 2, 3), (1, 2, 3), (10, 100, 500), range(5)):
            flags = ["--generators", str(G), "--max-word-letters", str(L), "--stages", str(N),
                     "--seed", str(seed), "--snapshots", str(max(1, N // 10))]
            code, _, err = quiet_main(["build", *flags, "--out", path])
            runs += 1
            if code != 0:
                problems.append(f"build G={G} L={L} N={N} seed={seed} exit {code}: {err.strip()}")
                continue
            code, out, _ = quiet_main(["verify", path, "--allow-warn"])
            status = parse_report(out)
            bad = [name for name in SIX if status.get(name) != verify.PASS]
            if code != 0 or bad:
                problems.append(f"verify G={G} L={L} N={N} seed={seed}: {bad or code}")
    elapsed = time.time() - start
    if elapsed > 300:
        problems.append(f"sweep took {elapsed:.0f}s")
    return not problems, f"{runs} build+verify runs, {len(problems)} problems, {elapsed:.0f}s", problems


# -- 2 --------------------------------------------------------------------------

def criterion_2():
    problems, checked = [], 0
    for N, seed in itertools.product((10, 100, 500), range(5)):
        state = run(Config(1, 1, N, seed=seed))
        details = {d["stage"]: d for d in verify.check_condition_v(state).details}
        for rec in state.log:
            t = rec.trace
            if t.skipped:
                continue
            checked += 1
            want = {str(PairVec(t.x, t.y)): "1", str(PairVec(-t.x, t.y_prime)): "1"}
            got = {p: q for q, p in details.get(rec.stage, {}).get("combination", [])}
            if got != want:
                problems.append(f"N={N} seed={seed} stage {rec.stage}: {got} != {want}")
    return checked > 0 and not problems, f"{checked} non-skipped stages, {len(problems)} mismatches", problems


# -- 3 --------------------------------------------------------------------------

# Hand traces of step V with target s0.  Names other than "x0" stand for fresh
# symbols; a point is (generator, first, second) with components as
# {name: coefficient}.
HAND_TRACES = {
    "f0^1": [
        (0, {"X": 1}, {"Y": 1}),
        (0, {"X": -1}, {"x0": 1, "Y": -1}),
    ],
    "f0^-1": [
        (0, {"Y": 1}, {"X": 1}),
        (0, {"x0": 1, "Y": -1}, {"X": -1}),
    ],
    "f1^1·f0^1": [
        (0, {"X": 1}, {"z1": 1}),
        (0, {"X": -1}, {"r1": 1}),
        (1, {"z1": 1}, {"Y": 1}),
        (1, {"r1": 1}, {"x0": 1, "Y": -1}),
    ],
}


def traced_points(word_text):
    code, out, err = quiet_main(["trace", "--generators", "2", "--max-word-letters", "2", "--stages", "1",
                                 "--stage", "0", "--word", word_text])
    assert code == 0, err
    step_i = out.split("STEP II")[0]
    pts = []
    for g, text in re.findall(r"^      f(\d+) \+= (<.*>)$", step_i, re.M):
        p = parse_pair(text)
        pts.append((int(g), p.first.as_dict(), p.second.as_dict()))
    return pts


def matches_up_to_renaming(got, hand):
    fresh = sorted({k for _, a, b in got for k in list(a) + list(b)} - {0})
    names = sorted({k for _, a, b in hand for k in list(a) + list(b)} - {"x0"})
    if len(fresh) != len(names) or len(got) != len(hand):
        return False
    for perm in itertools.permutations(fresh):
        rename = dict(zip(names, perm), x0=0)
        want = {(g, tuple(sorted((rename[k], Fraction(c)) for k, c in a.items())),
                 tuple(sorted((rename[k], Fraction(c)) for k, c in b.items()))) for g, a, b in hand}
        have = {(g, tuple(sorted(a.items())), tuple(sorted(b.items()))) for g, a, b in got}
        if want == have:
            return True
    return False


def criterion_3():
    problems = []
    for word_text, hand in HAND_TRACES.items():
        got = traced_points(word_text)
        if not matches_up_to_renaming(got, hand):
            problems.append(f"{word_text}: {got}")
    return not problems, f"{len(HAND_TRACES) - len(problems)}/{len(HAND_TRACES)} words match", problems


# -- 4 --------------------------------------------------------------------------

def random_vec(rng, n_symbols):
    k = rng.randint(0, 3)
    return {rng.randrange(n_symbols): Fraction(rng.choice([-1, 1]) * rng.randint(1, 10), rng.randint(1, 10))
            for _ in range(k)}


def sympy_rank(rows):
    try:
        import sympy
    except ImportError:
        return None
    return sympy.Matrix(rows).rank() if rows else 0


def criterion_4(instances=1000, seed=20261016):
    from oracles import to_dense
    rng = random.Random(seed)
    problems, positives = [], 0
    for i in range(instances):
        n = rng.randint(1, 8)
        raw = [(random_vec(rng, n), random_vec(rng, n)) for _ in range(rng.randint(0, 12))]
        if raw and rng.random() < 0.5:
            # a combination of the points, so membership is sometimes true
            cs = [Fraction(rng.randint(-10, 10), rng.randint(1, 10)) for _ in raw]
            probe = ({}, {})
            for c, (a, b) in zip(cs, raw):
                for side, src in ((probe[0], a), (probe[1], b)):
                    for k, v in src.items():
                        side[k] = side.get(k, 0) + c * v
        else:
            probe = (random_vec(rng, n), random_vec(rng, n))
        points = [PairVec(Vec(a), Vec(b)) for a, b in raw]
        v = PairVec(Vec(probe[0]), Vec(probe[1]))
        contains = span_contains(span_of(points), v)
        plif = is_plif(points)
        want_contains = dense_contains(raw, probe, n)
        want_plif = dense_independent(raw, n)
        rows = to_dense(raw, n)
        r = sympy_rank(rows)
        if r is not None:
            sym_contains = sympy_rank(rows + to_dense([probe], n)) == r
            sym_plif = r == len(raw)
            if (sym_contains, sym_plif) != (want_contains, want_plif):
                problems.append(f"instance {i}: the two oracles disagree")
        positives += want_contains
        if contains != want_contains or plif != want_plif:
            problems.append(f"instance {i}: contains {contains}/{want_contains} plif {plif}/{want_plif}")
    return not problems, f"{instances} instances ({positives} in-span), {len(problems)} disagreements", problems


# -- 5 --------------------------------------------------------------------------

def criterion_5():
    problems = []
    words = enumerate_words(2, 2)
    expected = len(brute_force_words(2, 2))
    if len(words) != expected:
        problems.append(f"{len(words)} words, brute force gives {expected}")
    stream = default_stream(2, 2, len(words), seed=0)
    state = run(Config(2, 2, 0), stream)
    served = {rec.requirement.word_idx for rec in state.log}
    if served != set(range(len(words))):
        problems.append(f"words without a stage: {sorted(set(range(len(words))) - served)}")
    sep = verify.check_separation(state, 2)
    if sep.status != verify.PASS or sep.counts["separated"] != len(words):
        problems.append(f"separation: {sep.line()}")
    for a, b in itertools.permutations(words, 2):
        if concat(a, inverse(b)) == IDENTITY:
            problems.append(f"{a} and {b} collapse")
    detail = f"{len(words)} words scheduled, {sep.counts.get('separated')} separated, " \
             f"{len(words) * (len(words) - 1)} distinct pairs nontrivial"
    return not problems, detail, problems


# -- 6 --------------------------------------------------------------------------

def criterion_6():
    problems = []
    fired = [0, 0, 0]
    with tempfile.TemporaryDirectory() as tmp:
        for G, L, N, seed in [(1, 1, 50, 0), (2, 2, 80, 1), (3, 3, 60, 2), (2, 3, 100, 4)]:
            flags = ["--generators", str(G), "--max-word-letters", str(L), "--stages", str(N),
                     "--seed", str(seed), "--snapshots", "10"]
            first, second = os.path.join(tmp, "a"), os.path.join(tmp, "b")
            quiet_main(["build", *flags, "--out", first])
            code, _, err = quiet_main(["build", *flags, "--resume", first, "--out", second])
            with open(first, "rb") as fa, open(second, "rb") as fb:
                if code != 0 or fa.read() != fb.read():
                    problems.append(f"G={G} L={L} N={N}: resumed dump differs ({err.strip()})")
            # drive the three steps directly over the reloaded state
            state = dump.load(first)
            before = dump.dumps(state)
            for req in default_stream(G, L, N, seed):
                fired[0] += step_v(state, req).skipped
                fired[1] += step_vi(state, req) is None
                fired[2] += step_vii(state, req) is None
            if dump.dumps(state) != before:
                problems.append(f"G={G} L={L} N={N}: step functions changed the state")
    if not all(fired):
        problems.append(f"skip branches fired {fired}")
    return not problems, f"resumed dumps identical, skip branches fired I/II/III = {fired}", problems


# -- 7 --------------------------------------------------------------------------

def corruptions(state):
    g = max(range(state.G), key=lambda i: len(state.funcs[i]))
    pairs = state.funcs[g].pairs()
    x, y = pairs[len(pairs) // 2]
    yield "delete", g, [p for p in pairs if p != (x, y)]
    yield "scaled duplicate", g, pairs + [(x.scale(Fraction(-3, 7)), y.scale(Fraction(-3, 7)))]
    yield "swap", g, [p if p != (x, y) else (y, x) for p in pairs]


def criterion_7():
    problems, seen = [], []
    for G, L, N, seed in [(1, 1, 30, 0), (2, 2, 60, 1), (3, 2, 60, 3)]:
        state = run(Config(G, L, N, seed=seed))
        for name, g, pairs in corruptions(state):
            funcs = list(state.funcs)
            funcs[g] = PartialFn.unchecked(pairs)
            bad = EngineState(G=state.G, max_letters=L, funcs=tuple(funcs), allocator=state.allocator,
                              seed_symbols=state.seed_symbols, log=state.log, snapshots=[], seed=seed)
            failing = [r for r in verify.run_checks(bad, L, snapshots=[bad.funcs]) if r.status == verify.FAIL]
            if not failing or not all(r.witnesses for r in failing):
                problems.append(f"{name} in G={G} L={L}: no failing check with a witness")
            else:
                seen.append(f"{name}->{failing[0].name}")
    return not problems, f"{len(seen)}/9 corruptions caught ({', '.join(sorted(set(seen)))})", problems


# -- 8 --------------------------------------------------------------------------

def criterion_8():
    problems = []
    for G in (1, 2, 3):
        for L in (1, 2, 3, 4):
            first = [tuple(w) for w in enumerate_words(G, L)]
            enumerate_words.cache_clear()
            second = [tuple(w) for w in enumerate_words(G, L)]
            expected = sorted(brute_force_words(G, L), key=word_order_key)
            if first != expected:
                problems.append(f"G={G} L={L}: differs from brute force")
            if first != second:
                problems.append(f"G={G} L={L}: order changed between runs")
    return not problems, f"12 (G, L) cases, {len(problems)} problems", problems


# -- harness --------------------------------------------------------------------

CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def evaluate(n):
    ok, detail, problems = CRITERIA[n]()
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    return ok, line, problems


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line, problems = evaluate(n)
    with capsys.disabled():
        print("\n" + line)
        for p in problems[:10]:
            print("    " + p)
    assert ok, "\n".join([line] + problems[:10])


if __name__ == "__main__":
    results = []
    for n in sorted(CRITERIA):
        ok, line, problems = evaluate(n)
        print(line, flush=True)
        for p in problems[:10]:
            print("    " + p)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
