"""Finite injective partial functions on the surrogate space and word evaluation."""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple

from pyrsistent import PMap, pmap

from .freewords import Word
from .qspace import PairVec, Vec


class PartialMapError(ValueError):
    pass


class DomainClash(PartialMapError):
    """The argument is already mapped to a different value."""


class InjectivityViolation(PartialMapError):
    """The value is already the image of a different argument."""


class PartialFn:
    """An immutable finite partial map ``Vec -> Vec`` with an inverse index.

    Both directions are persistent maps, so :meth:`insert` returns a new
    function sharing structure with the old one and stage snapshots cost
    nothing to keep.
    """

    __slots__ = ("forward", "backward", "_tables")

    def __init__(self, forward: PMap = pmap(), backward: PMap = pmap()):
        self.forward = forward
        self.backward = backward
        self._tables = None

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Vec, Vec]]) -> "PartialFn":
        f = cls()
        for x, y in pairs:
            f = f.insert(x, y)
        return f

    @classmethod
    def unchecked(cls, pairs: Iterable[Tuple[Vec, Vec]]) -> "PartialFn":
        """Build without validation; later duplicates overwrite earlier ones.

        Used for loading states that may be corrupt, so the verifier has
        something to reject.
        """
        fwd, bwd = {}, {}
        for x, y in pairs:
            fwd[x] = y
            bwd[y] = x
        return cls(pmap(fwd), pmap(bwd))

    def insert(self, x: Vec, y: Vec) -> "PartialFn":
        old = self.forward.get(x)
        if old is not None:
            if old == y:
                return self
            raise DomainClash(f"{x} already maps to {old}, cannot map it to {y}")
        pre = self.backward.get(y)
        if pre is not None:
            raise InjectivityViolation(f"{y} is already the image of {pre}, cannot be the image of {x}")
        out = PartialFn(self.forward.set(x, y), self.backward.set(y, x))
        if self._tables is not None:
            fwd, bwd = self._tables[0].copy(), self._tables[1].copy()
            fwd[x] = y
            bwd[y] = x
            out._tables = (fwd, bwd)
        return out

    def __call__(self, x: Vec) -> Optional[Vec]:
        return self.forward.get(x)

    def inv(self, y: Vec) -> Optional[Vec]:
        return self.backward.get(y)

    def in_dom(self, x: Vec) -> bool:
        return x in self.forward

    def in_rng(self, y: Vec) -> bool:
        return y in self.backward

    def __len__(self) -> int:
        return len(self.forward)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PartialFn) and self.forward == other.forward and self.backward == other.backward

    def __hash__(self):
        return hash(self.forward)

    def tables(self) -> Tuple[dict, dict]:
        """Plain-dict copies of both directions, built once per function."""
        if self._tables is None:
            self._tables = (dict(self.forward), dict(self.backward))
        return self._tables

    def pairs(self) -> List[Tuple[Vec, Vec]]:
        return sorted(self.forward.items())

    def graph(self) -> List[PairVec]:
        return [PairVec(x, y) for x, y in self.pairs()]

    def issubset(self, other: "PartialFn") -> bool:
        fwd = other.forward
        return all(fwd.get(x) == y for x, y in self.forward.items())

    def __repr__(self) -> str:
        return f"PartialFn({len(self)} pairs)"


def pf_insert(f: PartialFn, x: Vec, y: Vec) -> PartialFn:
    return f.insert(x, y)


def eval_word(funcs: Sequence[PartialFn], w: Word, x: Vec) -> Optional[Vec]:
    """Apply ``w`` to ``x``, first letter first; None as soon as a step is undefined."""
    for g, n in w:
        table = funcs[g].forward if n > 0 else funcs[g].backward
        for _ in range(abs(n)):
            x = table.get(x)
            if x is None:
                return None
    return x


def word_graph(funcs: Sequence[PartialFn], w: Word) -> List[PairVec]:
    """The graph of the partial composition ``w``, sorted by first component."""
    if not w:
        raise ValueError("word_graph needs a nonempty word")
    # compose as relations over dict snapshots: much cheaper than
    # evaluating point by point through the persistent maps
    g, n = w[0]
    current = {x: x for x in funcs[g].tables()[0 if n > 0 else 1]}
    for g, n in w:
        table = funcs[g].tables()[0 if n > 0 else 1]
        for _ in range(abs(n)):
            current = {x: table[y] for x, y in current.items() if y in table}
    out = [PairVec(x, y) for x, y in current.items()]
    out.sort(key=_point_key)
    return out


def _point_key(p: PairVec):
    return (p.first.terms, p.second.terms)


def format_graph(points: Iterable[PairVec]) -> List[str]:
    """Graph dump lines, sorted by the text of the first component."""
    return [f"  {p}" for p in sorted(points, key=lambda p: (str(p.first), str(p.second)))]
