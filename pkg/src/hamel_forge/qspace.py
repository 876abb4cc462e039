"""Exact linear algebra over Q on a symbolic vector space.

The surrogate for the reals is the Q-vector space with countably many basis
symbols ``s0, s1, ...``.  A :class:`Vec` is a finite rational combination of
symbols, a :class:`PairVec` a point of the plane built from two of them.
:class:`SpanBasis` keeps the Q-span of a set of plane points in fully reduced
row-echelon form and answers membership and representation queries.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

Scalar = Fraction
Number = Union[int, Fraction]

# A coordinate of the plane: (slot, symbol id), slot 0 = first component.
Coord = Tuple[int, int]


def format_scalar(q: Number) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_scalar(text: str) -> Fraction:
    return Fraction(text.strip())


class Vec:
    """An immutable vector in canonical form: sorted ``(symbol, coeff)`` terms, no zeros."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Union[Mapping[int, Number], Iterable[Tuple[int, Number]]] = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for k, c in items:
            if k < 0:
                raise ValueError(f"symbol ids are non-negative, got {k}")
            acc[k] = acc.get(k, 0) + c
        self.terms: Tuple[Tuple[int, Fraction], ...] = tuple(
            (k, Fraction(c)) for k, c in sorted(acc.items()) if c != 0
        )
        self._hash = hash(self.terms)

    @classmethod
    def _raw(cls, terms: Tuple[Tuple[int, Fraction], ...]) -> "Vec":
        # terms must already be canonical
        v = cls.__new__(cls)
        v.terms = terms
        v._hash = hash(terms)
        return v

    @classmethod
    def symbol(cls, k: int) -> "Vec":
        return cls._raw(((k, Fraction(1)),))

    @classmethod
    def zero(cls) -> "Vec":
        return cls._raw(())

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Vec) and self.terms == other.terms)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Vec") -> bool:
        return self.terms < other.terms

    def __iter__(self) -> Iterator[Tuple[int, Fraction]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.terms)

    def max_symbol(self) -> int:
        return self.terms[-1][0] if self.terms else -1

    def __add__(self, other: "Vec") -> "Vec":
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        for k, c in other.terms:
            s = acc.get(k, 0) + c
            if s:
                acc[k] = s
            else:
                del acc[k]
        return Vec._raw(tuple(sorted(acc.items())))

    def __neg__(self) -> "Vec":
        return Vec._raw(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other: "Vec") -> "Vec":
        return self + (-other)

    def scale(self, q: Number) -> "Vec":
        q = Fraction(q)
        if q == 0:
            return Vec.zero()
        return Vec._raw(tuple((k, q * c) for k, c in self.terms))

    def __rmul__(self, q: Number) -> "Vec":
        return self.scale(q)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(f"({format_scalar(c)})s{k}" for k, c in self.terms)

    def __repr__(self) -> str:
        return f"Vec({self})"


def vec_add(a: Vec, b: Vec) -> Vec:
    return a + b


def vec_neg(a: Vec) -> Vec:
    return -a


def vec_scale(q: Number, a: Vec) -> Vec:
    return a.scale(q)


_TERM = re.compile(r"\(([-+]?\d+(?:/\d+)?)\)s(\d+)")


def parse_vec(text: str) -> Vec:
    text = text.strip()
    if text == "0":
        return Vec.zero()
    terms = []
    for part in text.split("+"):
        m = _TERM.fullmatch(part)
        if m is None:
            raise ValueError(f"malformed vector term {part!r} in {text!r}")
        terms.append((int(m.group(2)), parse_scalar(m.group(1))))
    v = Vec(terms)
    if str(v) != text:
        raise ValueError(f"vector {text!r} is not in canonical form")
    return v


class PairVec:
    """A point ``<first | second>`` of the plane over the surrogate space."""

    __slots__ = ("first", "second", "_hash")

    def __init__(self, first: Vec, second: Vec):
        self.first = first
        self.second = second
        self._hash = hash((first, second))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PairVec) and self.first == other.first and self.second == other.second

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "PairVec") -> bool:
        return (self.first, self.second) < (other.first, other.second)

    def __iter__(self):
        yield self.first
        yield self.second

    def __add__(self, other: "PairVec") -> "PairVec":
        return PairVec(self.first + other.first, self.second + other.second)

    def __neg__(self) -> "PairVec":
        return PairVec(-self.first, -self.second)

    def scale(self, q: Number) -> "PairVec":
        return PairVec(self.first.scale(q), self.second.scale(q))

    def transpose(self) -> "PairVec":
        return PairVec(self.second, self.first)

    def is_zero(self) -> bool:
        return not self.first and not self.second

    def coords(self) -> dict:
        row = {(0, k): c for k, c in self.first.terms}
        row.update(((1, k), c) for k, c in self.second.terms)
        return row

    def __str__(self) -> str:
        return f"<{self.first} | {self.second}>"

    def __repr__(self) -> str:
        return f"PairVec{self}"


def parse_pair(text: str) -> PairVec:
    text = text.strip()
    if not (text.startswith("<") and text.endswith(">")) or " | " not in text:
        raise ValueError(f"malformed point {text!r}")
    left, right = text[1:-1].split(" | ", 1)
    return PairVec(parse_vec(left), parse_vec(right))


class SymbolAllocator:
    """Hands out symbol ids in strictly increasing order; ids are never reused.

    Every vector built from already-issued symbols has support below
    ``next_id``, so a freshly issued symbol lies outside the span of all of them.
    """

    def __init__(self, next_id: int = 0):
        self.next_id = next_id

    def fresh_symbol(self) -> int:
        k = self.next_id
        self.next_id += 1
        return k

    def fresh(self) -> Vec:
        return Vec.symbol(self.fresh_symbol())

    def ensure(self, count: int) -> None:
        """Mark ids below ``count`` as issued."""
        if count > self.next_id:
            self.next_id = count

    def __repr__(self) -> str:
        return f"SymbolAllocator(next_id={self.next_id})"


def fresh_symbol(allocator: SymbolAllocator) -> int:
    return allocator.fresh_symbol()


def _axpy(row: dict, q: Fraction, other: dict) -> None:
    # row += q * other, dropping zeros
    for k, c in other.items():
        s = row.get(k, 0) + q * c
        if s:
            row[k] = s
        else:
            row.pop(k, None)


class SpanBasis:
    """Incremental Q-span of plane points in fully reduced row-echelon form.

    Each row is normalized to coefficient 1 at its pivot, which is its least
    coordinate (first-slot symbols before second-slot ones), and every pivot
    column is zero in all other rows.  With ``track=True`` each row also carries
    its expression in terms of the inserted generators, which makes
    :meth:`represent` and dependency witnesses available.
    """

    def __init__(self, track: bool = False):
        self.track = track
        self.rows: dict = {}  # pivot -> row
        self.prov: dict = {}  # pivot -> {generator index: coeff}
        self.generators: list = []
        self._cols: dict = {}  # non-pivot coord -> set of pivots whose row uses it
        self.last_dependency: Optional[dict] = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def copy(self) -> "SpanBasis":
        s = SpanBasis(self.track)
        s.rows = {p: dict(r) for p, r in self.rows.items()}
        s.prov = {p: dict(r) for p, r in self.prov.items()}
        s.generators = list(self.generators)
        s._cols = {c: set(ps) for c, ps in self._cols.items()}
        return s

    def _reduce(self, row: dict, prov: Optional[dict]) -> None:
        hits = [(c, row[c]) for c in row if c in self.rows]
        for c, q in hits:
            _axpy(row, -q, self.rows[c])
            if prov is not None:
                _axpy(prov, -q, self.prov[c])

    def insert(self, v: PairVec) -> bool:
        """Add ``v`` to the span; True iff it was not already in it."""
        row = v.coords()
        prov = None
        if self.track:
            prov = {len(self.generators): Fraction(1)}
            self.generators.append(v)
        self._reduce(row, prov)
        if not row:
            self.last_dependency = prov
            return False
        pivot = min(row)
        inv = 1 / Fraction(row[pivot])
        if inv != 1:
            row = {k: c * inv for k, c in row.items()}
            if prov is not None:
                prov = {k: c * inv for k, c in prov.items()}
        for p in self._cols.pop(pivot, ()):
            other = self.rows[p]
            q = other[pivot]
            before = set(other)
            _axpy(other, -q, row)
            if prov is not None:
                _axpy(self.prov[p], -q, prov)
            after = set(other)
            for c in before - after:
                if c != pivot:
                    self._cols[c].discard(p)
            for c in after - before:
                self._cols.setdefault(c, set()).add(p)
        for c in row:
            if c != pivot:
                self._cols.setdefault(c, set()).add(pivot)
        self.rows[pivot] = row
        if prov is not None:
            self.prov[pivot] = prov
        return True

    def contains(self, v: PairVec) -> bool:
        row = v.coords()
        self._reduce(row, None)
        return not row

    def represent(self, v: PairVec) -> Optional[list]:
        """Coefficients ``q`` over :attr:`generators` with ``sum q_i * gen_i == v``, or None."""
        if not self.track:
            raise ValueError("represent needs a SpanBasis built with track=True")
        row = v.coords()
        hits = [(c, row[c]) for c in row if c in self.rows]
        self._reduce(row, None)
        if row:
            return None
        coeffs = [Fraction(0)] * len(self.generators)
        for c, q in hits:
            for g, a in self.prov[c].items():
                coeffs[g] += q * a
        return coeffs

    def check_invariants(self) -> None:
        pivots = set(self.rows)
        for p, row in self.rows.items():
            assert row, "zero row stored"
            assert min(row) == p and row[p] == 1, f"bad pivot {p}"
            assert not (pivots - {p}) & set(row), f"row {p} not reduced"
        if self.track:
            for p, row in self.rows.items():
                acc: dict = {}
                for g, a in self.prov[p].items():
                    _axpy(acc, a, self.generators[g].coords())
                assert acc == row, f"provenance of row {p} is stale"


def span_insert(s: SpanBasis, v: PairVec) -> Tuple[SpanBasis, bool]:
    """Functional form of :meth:`SpanBasis.insert`; ``s`` is left untouched."""
    t = s.copy()
    flag = t.insert(v)
    return t, flag


def span_contains(s: SpanBasis, v: PairVec) -> bool:
    return s.contains(v)


def span_of(points: Iterable[PairVec], track: bool = False) -> SpanBasis:
    s = SpanBasis(track=track)
    for p in points:
        s.insert(p)
    return s


def represent(s: SpanBasis, v: PairVec) -> Optional[list]:
    return s.represent(v)


def is_plif(points: Iterable[PairVec]) -> bool:
    s = SpanBasis()
    return all(s.insert(p) for p in points)


def dependency_witness(points: Sequence[PairVec]) -> Optional[list]:
    """A nontrivial vanishing combination ``[(coeff, point), ...]`` of ``points``, or None.

    The witness is built from the first point that falls into the span of its
    predecessors.
    """
    s = SpanBasis(track=True)
    for p in points:
        if not s.insert(p):
            dep = s.last_dependency
            return [(q, s.generators[g]) for g, q in sorted(dep.items()) if q]
    return None
