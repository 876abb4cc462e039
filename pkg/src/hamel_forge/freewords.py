"""Reduced words in the free group on generators ``f0 .. f(G-1)``.

A word is stored in application order: ``letters[0]`` acts first.  The text
form prints the last-applied block leftmost, e.g. the word that applies ``f0``
and then ``f1`` prints as ``f1^1·f0^1``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, NamedTuple, Tuple


class Letter(NamedTuple):
    gen: int
    exp: int


class Word(tuple):
    """A reduced word: a tuple of :class:`Letter` with no zero exponents and
    no two adjacent letters on the same generator."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[Tuple[int, int]] = ()):
        letters = tuple(Letter(int(g), int(n)) for g, n in letters)
        for i, (g, n) in enumerate(letters):
            if n == 0:
                raise ValueError(f"zero exponent at block {i}")
            if g < 0:
                raise ValueError(f"negative generator index at block {i}")
            if i and letters[i - 1].gen == g:
                raise ValueError(f"blocks {i - 1} and {i} share generator f{g}")
        return super().__new__(cls, letters)

    @property
    def blocks(self) -> int:
        return len(self)

    @property
    def letter_count(self) -> int:
        return sum(abs(n) for _, n in self)

    def generators(self) -> set:
        return {g for g, _ in self}

    def sort_key(self) -> tuple:
        return (self.letter_count, self.blocks, tuple(_letter_key(l) for l in self))

    def __str__(self) -> str:
        if not self:
            return "id"
        return "·".join(f"f{g}^{n}" for g, n in reversed(self))

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


IDENTITY = Word()


def _letter_key(letter: Letter) -> tuple:
    return (letter.gen, letter.exp < 0, abs(letter.exp))


def reduce(raw: Iterable[Tuple[int, int]]) -> Word:
    """Freely reduce a letter sequence: merge equal neighbours, drop zero blocks."""
    stack: List[List[int]] = []
    for g, n in raw:
        if n == 0:
            continue
        if stack and stack[-1][0] == g:
            stack[-1][1] += n
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([g, n])
    return Word(stack)


def inverse(w: Word) -> Word:
    return Word((g, -n) for g, n in reversed(w))


def concat(a: Word, b: Word) -> Word:
    """The reduced word applying ``a`` first, then ``b``."""
    return reduce(tuple(a) + tuple(b))


def parse_word(text: str) -> Word:
    text = text.strip()
    if text == "id":
        return IDENTITY
    blocks = []
    for part in text.split("·"):
        head, sep, exp = part.partition("^")
        if not sep or not head.startswith("f"):
            raise ValueError(f"malformed word block {part!r}")
        blocks.append((int(head[1:]), int(exp)))
    return Word(reversed(blocks))


def _words_of_shape(G: int, total: int, blocks: int, prev: int) -> Iterator[Tuple[Letter, ...]]:
    # Yields words in lexicographic order of (gen, sign, |exp|) per letter.
    if blocks == 0:
        if total == 0:
            yield ()
        return
    for g in range(G):
        if g == prev:
            continue
        for sign in (1, -1):
            for a in range(1, total - blocks + 2):
                for rest in _words_of_shape(G, total - a, blocks - 1, g):
                    yield (Letter(g, sign * a),) + rest


@lru_cache(maxsize=64)
def enumerate_words(G: int, max_letters: int) -> Tuple[Word, ...]:
    """All nonempty reduced words with at most ``max_letters`` letters.

    Ordered by letter count, then block count, then lexicographically on
    ``(generator, positive before negative, |exponent|)`` per block.  The
    position of a word in this tuple is its word index.
    """
    if G < 1 or max_letters < 1:
        raise ValueError("need G >= 1 and max_letters >= 1")
    out = []
    for s in range(1, max_letters + 1):
        for m in range(1, s + 1):
            out.extend(Word(w) for w in _words_of_shape(G, s, m, -1))
    return tuple(out)


def word_count(G: int, max_letters: int) -> int:
    """Closed-form number of nonempty reduced words with at most ``max_letters`` letters."""
    from math import comb

    total = 0
    for s in range(1, max_letters + 1):
        for m in range(1, s + 1):
            total += comb(s - 1, m - 1) * 2**m * G * (G - 1) ** (m - 1)
    return total


@lru_cache(maxsize=64)
def word_index(G: int, max_letters: int) -> Dict[Word, int]:
    return {w: i for i, w in enumerate(enumerate_words(G, max_letters))}


def word_at(G: int, idx: int) -> Word:
    """The word with index ``idx``; the index does not depend on the letter cap."""
    if idx < 0:
        raise IndexError(idx)
    s = 1
    while word_count(G, s) <= idx:
        s += 1
    return enumerate_words(G, s)[idx]


def index_of(G: int, w: Word) -> int:
    if not w:
        raise ValueError("the identity word has no index")
    if any(g >= G for g in w.generators()):
        raise ValueError(f"{w} uses a generator outside f0..f{G - 1}")
    return word_index(G, w.letter_count)[w]
