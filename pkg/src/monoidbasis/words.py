"""Words over a countable variable alphabet.

A word is a finite sequence of variable symbols; the empty word is the
identity of the free monoid and is a legal value everywhere.  Variables are
plain strings.  The text grammar accepts whitespace-separated tokens
(``x t1 x y t2 y``) and, when every variable is a single letter followed by
optional digits, the compact form ``xt1xyt2y``.  A ``^k`` suffix repeats the
preceding letter or parenthesised group, so ``(xy)^3`` and ``a^2ta`` are
accepted everywhere; the digit-suffix power shorthand (``a2ta`` for ``aata``)
must be requested explicitly via ``compact_powers`` because digits are
otherwise part of variable names like ``t1``.

Linearity is a property of a variable *in a word* (exactly one occurrence),
not of the symbol itself; the same symbol may be linear in one word and not
in another.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Optional, Union


class WordSyntaxError(ValueError):
    """Raised when word text cannot be parsed."""


class NamedVariableLinear(ValueError):
    """A compactness predicate was asked about a variable with <= 1 occurrence."""


_TOKEN_RE = re.compile(r"[A-Za-z][0-9]*")
_SAFE_LETTER_RE = re.compile(r"\A[A-Za-z][0-9]*\Z")


@dataclass(frozen=True)
class Word:
    """Immutable word; ``letters`` is a tuple of variable symbols."""

    letters: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.letters, tuple):
            object.__setattr__(self, "letters", tuple(self.letters))

    # -- basic container behaviour -------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def __getitem__(self, i) -> Union[str, "Word"]:
        if isinstance(i, slice):
            return Word(self.letters[i])
        return self.letters[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __mul__(self, k: int) -> "Word":
        return Word(self.letters * k)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    # -- content bookkeeping -------------------------------------------

    @cached_property
    def _positions(self) -> dict[str, tuple[int, ...]]:
        pos: dict[str, list[int]] = {}
        for i, a in enumerate(self.letters):
            pos.setdefault(a, []).append(i)
        return {a: tuple(p) for a, p in pos.items()}

    def content(self) -> frozenset[str]:
        """con(u): the set of variables occurring in the word."""
        return frozenset(self._positions)

    def occ(self, x: str) -> int:
        """Number of occurrences of ``x``."""
        return len(self._positions.get(x, ()))

    def positions(self, x: str) -> tuple[int, ...]:
        return self._positions.get(x, ())

    def con_n(self, n: int) -> frozenset[str]:
        """Variables occurring at least once and at most ``n`` times."""
        return frozenset(a for a, p in self._positions.items() if len(p) <= n)

    def linear(self) -> frozenset[str]:
        """lin(u): variables occurring exactly once."""
        return self.con_n(1)

    def nonlinear(self) -> frozenset[str]:
        """non(u): variables occurring more than once."""
        return frozenset(a for a, p in self._positions.items() if len(p) > 1)

    def is_n_limited(self, n: int) -> bool:
        return all(len(p) <= n for p in self._positions.values())

    def is_almost_linear(self) -> bool:
        """At most one non-linear variable."""
        return len(self.nonlinear()) <= 1

    def reverse(self) -> "Word":
        return Word(self.letters[::-1])

    # -- occurrence references -------------------------------------------

    def occ_at(self, pos: int) -> "OccRef":
        """The OccRef for the letter at a position."""
        a = self.letters[pos]
        return OccRef(a, self._positions[a].index(pos) + 1)

    def position_of(self, ref: "OccRef") -> int:
        try:
            return self._positions[ref.variable][ref.index - 1]
        except (KeyError, IndexError):
            raise ValueError(f"{ref} does not resolve in {self!r}") from None

    def occ_refs(self) -> tuple["OccRef", ...]:
        """ocs(u) in positional (left-to-right) order."""
        counts: dict[str, int] = {}
        out = []
        for a in self.letters:
            counts[a] = counts.get(a, 0) + 1
            out.append(OccRef(a, counts[a]))
        return tuple(out)

    def is_first(self, pos: int) -> bool:
        return self._positions[self.letters[pos]][0] == pos

    def is_last(self, pos: int) -> bool:
        return self._positions[self.letters[pos]][-1] == pos


EMPTY = Word(())


@dataclass(frozen=True, order=True)
class OccRef:
    """The ``index``-th from the left occurrence of ``variable`` (index >= 1)."""

    variable: str
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("occurrence index starts at 1")

    def __repr__(self) -> str:
        return f"{self.variable}_{self.index}"


# -- parsing / printing ------------------------------------------------------


def _parse_chunk(chunk: str, compact_powers: bool) -> list[str]:
    letters: list[str] = []
    i, n = 0, len(chunk)

    def atom() -> list[str]:
        nonlocal i
        if chunk[i] == "(":
            depth, j = 1, i + 1
            while j < n and depth:
                if chunk[j] == "(":
                    depth += 1
                elif chunk[j] == ")":
                    depth -= 1
                j += 1
            if depth:
                raise WordSyntaxError(f"unbalanced parentheses in {chunk!r}")
            inner = _parse_chunk(chunk[i + 1:j - 1], compact_powers)
            i = j
            return inner
        m = _TOKEN_RE.match(chunk, i)
        if not m:
            raise WordSyntaxError(f"cannot read a variable at {chunk[i:]!r}")
        if compact_powers:
            name = chunk[i]
            i += 1
            power = 1
            if m2 := re.compile(r"[0-9]+").match(chunk, i):
                power = int(m2.group())
                i = m2.end()
            return [name] * power
        i = m.end()
        return [m.group()]

    while i < n:
        part = atom()
        if i < n and chunk[i] == "^":
            m = re.compile(r"\^([0-9]+)").match(chunk, i)
            if not m:
                raise WordSyntaxError(f"bad power in {chunk!r}")
            part = part * int(m.group(1))
            i = m.end()
        letters.extend(part)
    return letters


def parse_word(text: str, compact_powers: bool = False) -> Word:
    """Parse word text (see the module docstring for the grammar)."""
    letters: list[str] = []
    for chunk in text.split():
        letters.extend(_parse_chunk(chunk, compact_powers))
    return Word(tuple(letters))


def W(text: str) -> Word:
    """Shorthand constructor used throughout the tests."""
    return parse_word(text)


def format_word(w: Word, empty: str = "1") -> str:
    """Print a word; round-trips through parse_word for grammar-safe letters."""
    if not w.letters:
        return empty
    if all(_SAFE_LETTER_RE.match(a) for a in w.letters):
        return "".join(w.letters)
    return " ".join(w.letters)


# -- deletion ----------------------------------------------------------------


def delete(u: Word, keep: Iterable[str]) -> Word:
    """u(X): delete all occurrences of all variables that are not in X."""
    keep = frozenset(keep)
    return Word(tuple(a for a in u.letters if a in keep))


# -- block decompositions ----------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """A span of a word: a single-letter separator or a nonempty block."""

    kind: str  # "sep" | "block"
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class BlockDecomposition:
    """Alternating linear-letter separators and maximal blocks.

    A *block* is a maximal factor containing no linear letters of the word.
    Concatenating the segments in order reproduces the word exactly; a purely
    linear word has no blocks.
    """

    word: Word
    segments: tuple[Segment, ...]

    @property
    def blocks(self) -> tuple[Word, ...]:
        return tuple(self.word[s.start:s.end] for s in self.segments
                     if s.kind == "block")

    @property
    def separators(self) -> tuple[str, ...]:
        return tuple(self.word.letters[s.start] for s in self.segments
                     if s.kind == "sep")

    def block_spans(self) -> tuple[tuple[int, int], ...]:
        return tuple((s.start, s.end) for s in self.segments if s.kind == "block")

    def rejoin(self) -> Word:
        return Word(tuple(itertools.chain.from_iterable(
            self.word.letters[s.start:s.end] for s in self.segments)))


class Block12Decomposition(BlockDecomposition):
    """Like BlockDecomposition, but separators are the first and last
    occurrences of variables; every letter inside a 12-block is a middle
    occurrence of a variable occurring at least 3 times."""


def _decompose(u: Word, is_sep) -> tuple[Segment, ...]:
    segments: list[Segment] = []
    i, n = 0, len(u)
    while i < n:
        if is_sep(i):
            segments.append(Segment("sep", i, i + 1))
            i += 1
        else:
            j = i
            while j < n and not is_sep(j):
                j += 1
            segments.append(Segment("block", i, j))
            i = j
    return tuple(segments)


def blocks(u: Word) -> BlockDecomposition:
    """Decompose a word into linear-letter separators and maximal blocks."""
    linear = u.linear()
    return BlockDecomposition(u, _decompose(u, lambda i: u.letters[i] in linear))


def blocks12(u: Word) -> Block12Decomposition:
    """Decompose a word into first/last-occurrence separators and 12-blocks."""
    return Block12Decomposition(
        u, _decompose(u, lambda i: u.is_first(i) or u.is_last(i)))


# -- compactness -------------------------------------------------------------


def _require_nonlinear(u: Word, x: str) -> None:
    if u.occ(x) <= 1:
        raise NamedVariableLinear(f"{x!r} occurs {u.occ(x)} time(s) in {u!r}")


def _contiguous_in_blocks(u: Word, vars_: frozenset[str]) -> bool:
    for start, end in blocks(u).block_spans():
        hits = [i for i in range(start, end) if u.letters[i] in vars_]
        if hits and hits[-1] - hits[0] + 1 != len(hits):
            return False
    return True


def is_x_compact(u: Word, x: str) -> bool:
    """All occurrences of x are collected together in each block of u."""
    _require_nonlinear(u, x)
    return _contiguous_in_blocks(u, frozenset((x,)))


def is_xy_compact(u: Word, x: str, y: str) -> bool:
    """All occurrences of x and y are collected together in each block of u."""
    if x == y:
        raise ValueError("is_xy_compact needs two distinct variables")
    _require_nonlinear(u, x)
    _require_nonlinear(u, y)
    return _contiguous_in_blocks(u, frozenset((x, y)))


def is_compact(u: Word, vars_: Optional[Union[str, tuple[str, str]]] = None) -> bool:
    """Compactness predicate.

    With no named variables: u is compact when it is x-compact for every
    non-linear x.  With a single variable: x-compactness.  With a pair:
    xy-compactness.
    """
    if vars_ is None:
        return all(_contiguous_in_blocks(u, frozenset((x,)))
                   for x in u.nonlinear())
    if isinstance(vars_, str):
        return is_x_compact(u, vars_)
    x, y = vars_
    return is_xy_compact(u, x, y)


# -- scattered subwords (Simon) ----------------------------------------------


@lru_cache(maxsize=65536)
def _subword_tuples(letters: tuple[str, ...], m: int) -> frozenset[tuple[str, ...]]:
    # frontier maps a subword to the minimal end position of an embedding;
    # extending from the minimal embedding enumerates each subword once.
    out: set[tuple[str, ...]] = set()
    frontier: dict[tuple[str, ...], int] = {(): 0}
    for _ in range(m):
        nxt: dict[tuple[str, ...], int] = {}
        for sub, pos in frontier.items():
            seen: set[str] = set()
            for j in range(pos, len(letters)):
                a = letters[j]
                if a in seen:
                    continue
                seen.add(a)
                key = sub + (a,)
                old = nxt.get(key)
                if old is None or j + 1 < old:
                    nxt[key] = j + 1
        if not nxt:
            break
        out.update(nxt)
        frontier = nxt
    return frozenset(out)


def scattered_subwords(u: Word, m: int) -> frozenset[Word]:
    """All nonempty scattered subwords (subsequences) of u of length <= m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return frozenset(Word(t) for t in _subword_tuples(u.letters, m))


def subword_key(u: Word, m: int) -> frozenset[tuple[str, ...]]:
    """Hashable key identifying the J_m class of u (used for bulk checks)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return _subword_tuples(u.letters, m)


def simon_equiv(u: Word, v: Word, m: int) -> bool:
    """True iff u and v have the same scattered subwords of length <= m.

    This is exactly membership of u = v in J_m, the equational theory of the
    monoid of reflexive binary relations on m+1 points.
    """
    return subword_key(u, m) == subword_key(v, m)
