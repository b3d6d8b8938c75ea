"""Finite monoids and brute-force model checking.

Monoids are multiplication tables over dense element indices with a
designated identity and human-readable labels.  The builders cover the
constructions used throughout: Rees quotients S(W) over factor sets of
finite word families, the five-element monoid A_0^1, the monoids S_n of
reflexive binary relations, and direct products.

``satisfies`` is the ground-truth oracle: it enumerates every assignment of
the identity's variables into the monoid (in mixed-radix order, with
short-circuit on the first disagreement) and is vectorised with numpy when
the assignment space is large.  Both paths are exact.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .identities import Identity
from .words import EMPTY, NamedVariableLinear, Word, blocks, delete

_ASSOC_EXHAUSTIVE_MAX = 512
_ASSOC_SAMPLES = 200_000
_PURE_LIMIT = 4096
_SCREEN_SIZE = 2048
_BLOCK = 1 << 20


class EmptyWordInW(ValueError):
    """S(W) requires nonempty words."""


class SizeOutOfRange(ValueError):
    """Reflexive-relation monoids are built for 2 <= n <= 4 only."""


class BoundTooSmall(ValueError):
    """Isoterm search bound below the probed word's length."""


class FiniteMonoid:
    """Element set {0..size-1} with a multiplication table and identity.

    The table is validated at construction: the identity laws exhaustively,
    associativity exhaustively up to ``_ASSOC_EXHAUSTIVE_MAX`` elements and
    by a large deterministic random sample beyond that (the only monoid we
    build above the threshold is S_4, whose operation is relation
    composition and associative by construction).
    """

    def __init__(self, table, one: int, labels: Optional[Sequence[str]] = None,
                 name: Optional[str] = None, validate: bool = True):
        table = np.asarray(table)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("table must be square")
        n = table.shape[0]
        dtype = np.int16 if n <= 32767 else np.int32
        self.table = np.ascontiguousarray(table.astype(dtype))
        self.table.setflags(write=False)
        self.size = n
        self.one = int(one)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        self.name = name or f"monoid{n}"
        if len(self.labels) != n:
            raise ValueError("labels length mismatch")
        if validate:
            self._validate()
        self._pow_vectors: dict[int, np.ndarray] = {}

    def _validate(self) -> None:
        T, n, e = self.table, self.size, self.one
        if T.min() < 0 or T.max() >= n:
            raise ValueError("table entry out of range")
        idx = np.arange(n)
        if not (np.array_equal(T[e], idx) and np.array_equal(T[:, e], idx)):
            raise ValueError("identity element law fails")
        if n <= _ASSOC_EXHAUSTIVE_MAX:
            chunk = max(1, (1 << 22) // max(1, n * n))
            for s in range(0, n, chunk):
                xs = idx[s:s + chunk]
                left = T[T[xs], :]
                right = T[xs][:, T]
                if not np.array_equal(left, right):
                    raise ValueError("multiplication is not associative")
        else:
            rng = np.random.default_rng(0xA550C)
            xs, ys, zs = rng.integers(0, n, size=(3, _ASSOC_SAMPLES))
            if not np.array_equal(T[T[xs, ys], zs], T[xs, T[ys, zs]]):
                raise ValueError("multiplication is not associative (sampled)")

    def __repr__(self) -> str:
        return f"<FiniteMonoid {self.name} order {self.size}>"

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def label_index(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def pytable(self) -> list[list[int]]:
        cached = getattr(self, "_pytable", None)
        if cached is None:
            cached = self.table.tolist()
            self._pytable = cached
        return cached

    def pow_vec(self, k: int) -> np.ndarray:
        """Vector of k-th powers: pow_vec(k)[e] = e^k (k >= 1)."""
        v = self._pow_vectors.get(k)
        if v is None:
            if k == 1:
                v = np.arange(self.size, dtype=self.table.dtype)
            else:
                v = self.table[self.pow_vec(k - 1), np.arange(self.size)]
            self._pow_vectors[k] = v
        return v

    def power(self, i: int, k: int) -> int:
        """i^k with i^0 = one."""
        e = self.one
        for _ in range(k):
            e = int(self.table[e, i])
        return e

    def eval_word(self, w: Word, assignment: dict[str, int]) -> int:
        rows = self.pytable
        e = self.one
        for a in w.letters:
            e = rows[e][assignment[a]]
        return e

    def is_group(self) -> bool:
        """Every element two-sided invertible.  A finite monoid satisfies an
        irregular identity iff it is a group (substituting the identity
        element for the shared variables collapses one side to 1)."""
        cached = getattr(self, "_is_group", None)
        if cached is None:
            T, e = self.table, self.one
            cached = all(
                any(T[i, j] == e and T[j, i] == e for j in range(self.size))
                for i in range(self.size))
            self._is_group = cached
        return cached


# -- builders ------------------------------------------------------------------


def _factors(w: Word) -> set[tuple[str, ...]]:
    out = set()
    for i in range(len(w)):
        for j in range(i + 1, len(w) + 1):
            out.add(w.letters[i:j])
    return out


def build_SW(W: Iterable[Word], name: Optional[str] = None) -> FiniteMonoid:
    """Rees quotient S(W): nonzero elements are the factors of words of W,
    multiplication is concatenation truncated to 0 outside the factor set."""
    words = sorted(set(Word(w.letters) for w in W), key=lambda w: (len(w), w.letters))
    if any(len(w) == 0 for w in words):
        raise EmptyWordInW("S(W) is defined for nonempty words")
    factors: set[tuple[str, ...]] = set()
    for w in words:
        factors |= _factors(w)
    ordered = sorted(factors, key=lambda t: (len(t), t))
    elems: list[tuple[str, ...]] = [()] + ordered  # 1 first, then factors
    index = {t: i for i, t in enumerate(elems)}
    zero = len(elems)
    n = zero + 1
    table = np.zeros((n, n), dtype=np.int32)
    for i, ti in enumerate(elems):
        for j, tj in enumerate(elems):
            table[i, j] = index.get(ti + tj, zero)
    table[zero, :] = zero
    table[:, zero] = zero
    labels = ["1"] + ["".join(t) for t in ordered] + ["0"]
    if name is None:
        name = "S({%s})" % ",".join(str(w) for w in words)
    return FiniteMonoid(table, one=0, labels=labels, name=name)


def build_A01() -> FiniteMonoid:
    """A_0^1: the monoid obtained by adjoining an identity to
    A_0 = <a, b | aa = a, bb = b, ab = 0> of order four."""
    labels = ["1", "a", "b", "ba", "0"]
    one, a, b, ba, z = range(5)
    table = np.full((5, 5), z, dtype=np.int16)
    table[one] = [one, a, b, ba, z]
    table[:, one] = [one, a, b, ba, z]
    table[a, a] = a          # aa = a
    table[b, b] = b          # bb = b
    table[a, b] = z          # ab = 0
    table[b, a] = ba
    table[b, ba] = ba        # b(ba) = (bb)a = ba
    table[ba, a] = ba        # (ba)a = b(aa) = ba
    table[a, ba] = z         # a(ba) = (ab)a = 0
    table[ba, b] = z         # (ba)b = b(ab) = 0
    table[ba, ba] = z
    return FiniteMonoid(table, one=one, labels=labels, name="A_0^1")


@lru_cache(maxsize=None)
def build_reflexive_relations(n: int) -> FiniteMonoid:
    """The monoid S_n of all reflexive binary relations on n points under
    relation composition; order 2^(n^2 - n)."""
    if not 2 <= n <= 4:
        raise SizeOutOfRange("supported sizes are 2..4")
    offdiag = [(i, j) for i in range(n) for j in range(n) if i != j]
    N = 1 << len(offdiag)
    bits = (np.arange(N, dtype=np.int64)[:, None] >> np.arange(len(offdiag))) & 1
    rows = np.zeros((N, n), dtype=np.uint16)
    for i in range(n):
        rows[:, i] = 1 << i
    for k, (i, j) in enumerate(offdiag):
        rows[:, i] |= (bits[:, k] << j).astype(np.uint16)

    # rowor[e, mask] = union of the rows of e selected by mask
    rowor = np.zeros((N, 1 << n), dtype=np.uint16)
    for mask in range(1, 1 << n):
        low = mask & (mask - 1)
        j = (mask ^ low).bit_length() - 1
        rowor[:, mask] = rowor[:, low] | rows[:, j]

    codes = np.zeros(N, dtype=np.int64)
    for i in range(n):
        codes |= rows[:, i].astype(np.int64) << (n * i)
    code_to_index = np.full(1 << (n * n), -1, dtype=np.int64)
    code_to_index[codes] = np.arange(N)

    RT = np.ascontiguousarray(rowor.T)
    table = np.zeros((N, N), dtype=np.int16 if N <= 32767 else np.int32)
    chunk = max(1, (1 << 22) // N)
    for s in range(0, N, chunk):
        xs = np.arange(s, min(s + chunk, N))
        zcode = np.zeros((len(xs), N), dtype=np.int64)
        for i in range(n):
            zcode |= RT[rows[xs, i]].astype(np.int64) << (n * i)
        table[xs, :] = code_to_index[zcode]

    one_code = sum((1 << i) << (n * i) for i in range(n))
    one = int(code_to_index[one_code])
    labels = ["|".join(format(int(r), f"0{n}b")[::-1] for r in rows[e])
              for e in range(N)]
    return FiniteMonoid(table, one=one, labels=labels, name=f"S_{n}")


def direct_product(M: FiniteMonoid, N: FiniteMonoid,
                   name: Optional[str] = None) -> FiniteMonoid:
    """Componentwise product; element (i, j) is index i*|N| + j."""
    nN = N.size
    TM = M.table.astype(np.int64) * nN
    TP = (TM[:, None, :, None] + N.table[None, :, None, :]).reshape(
        M.size * nN, M.size * nN)
    labels = [f"({a},{b})" for a in M.labels for b in N.labels]
    return FiniteMonoid(TP, one=M.one * nN + N.one, labels=labels,
                        name=name or f"{M.name}x{N.name}", validate=False)


# -- satisfaction --------------------------------------------------------------


def _runs(w: Word) -> tuple[tuple[str, int], ...]:
    return tuple((a, sum(1 for _ in g)) for a, g in itertools.groupby(w.letters))


def eval_word_batch(M: FiniteMonoid, w: Word,
                    assignment: dict[str, np.ndarray]) -> np.ndarray:
    """Evaluate a word under many assignments at once; arrays broadcast."""
    T = M.table
    e: Optional[np.ndarray] = None
    for a, k in _runs(w):
        vals = M.pow_vec(k)[assignment[a]]
        e = vals if e is None else T[e, vals]
    if e is None:
        shape = np.broadcast(*assignment.values()).shape if assignment else ()
        return np.full(shape, M.one, dtype=T.dtype)
    return e


def _satisfies_pure(M: FiniteMonoid, lhs: Word, rhs: Word,
                    variables: list[str]) -> bool:
    rows = M.pytable
    one = M.one
    slot = {a: i for i, a in enumerate(variables)}
    li = [slot[a] for a in lhs.letters]
    ri = [slot[a] for a in rhs.letters]
    for asg in itertools.product(range(M.size), repeat=len(variables)):
        e1 = one
        for i in li:
            e1 = rows[e1][asg[i]]
        e2 = one
        for i in ri:
            e2 = rows[e2][asg[i]]
        if e1 != e2:
            return False
    return True


def _satisfies_numpy(M: FiniteMonoid, lhs: Word, rhs: Word,
                     variables: list[str], jobs: int = 1) -> bool:
    n, k = M.size, len(variables)
    total = n ** k

    if total > (1 << 16):
        # Violations are usually found fast.  Uniform random assignments do
        # not discriminate on zero-heavy or dense monoids, so half the probes
        # are identity-biased (sparse) assignments.
        rng = np.random.default_rng(0xC0FFEE)
        uniform = {a: rng.integers(0, n, size=_SCREEN_SIZE) for a in variables}
        sparse = {a: np.where(rng.random(_SCREEN_SIZE) < 0.5, M.one,
                              rng.integers(0, n, size=_SCREEN_SIZE))
                  for a in variables}
        for probe in (sparse, uniform):
            if not np.array_equal(eval_word_batch(M, lhs, probe),
                                  eval_word_batch(M, rhs, probe)):
                return False

    def check_block(start: int, stop: int) -> bool:
        flat = np.arange(start, stop, dtype=np.int64)
        coords = np.unravel_index(flat, (n,) * k)
        asg = {a: coords[i] for i, a in enumerate(variables)}
        return np.array_equal(eval_word_batch(M, lhs, asg),
                              eval_word_batch(M, rhs, asg))

    spans = [(s, min(s + _BLOCK, total)) for s in range(0, total, _BLOCK)]
    if jobs > 1 and len(spans) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for ok in pool.map(lambda sp: check_block(*sp), spans):
                if not ok:
                    return False
        return True
    return all(check_block(s, e) for s, e in spans)


def satisfies(M: FiniteMonoid, ident: Identity, jobs: int = 1) -> bool:
    """True iff every assignment of the identity's variables into M gives the
    same element on both sides (the identity element is a legal value)."""
    variables = sorted(ident.content())
    if not variables:
        return True
    if M.size ** len(variables) <= _PURE_LIMIT:
        return _satisfies_pure(M, ident.lhs, ident.rhs, variables)
    return _satisfies_numpy(M, ident.lhs, ident.rhs, variables, jobs=jobs)


def find_violation(M: FiniteMonoid, ident: Identity) -> Optional[dict[str, int]]:
    """First assignment (mixed-radix order) on which the sides disagree."""
    variables = sorted(ident.content())
    for asg in itertools.product(range(M.size), repeat=len(variables)):
        assignment = dict(zip(variables, asg))
        if M.eval_word(ident.lhs, assignment) != M.eval_word(ident.rhs, assignment):
            return assignment
    return None


# -- bounded isoterm search ------------------------------------------------------


@dataclass(frozen=True)
class IsotermVerdict:
    kind: str  # "not_isoterm" | "isoterm_up_to"
    bound: int
    witness: Optional[Identity] = None
    widened: bool = False  # search alphabet included one fresh variable

    def is_isoterm(self) -> bool:
        return self.kind == "isoterm_up_to"

    def __repr__(self) -> str:
        if self.kind == "not_isoterm":
            return f"NotIsoterm({self.witness})"
        extra = ", widened" if self.widened else ""
        return f"IsotermUpTo({self.bound}{extra})"


def _fresh_variable(used: frozenset[str]) -> str:
    for c in "zqwpnmkjihgfedcba":
        if c not in used:
            return c
    i = 0
    while f"z{i}" in used:
        i += 1
    return f"z{i}"


def is_isoterm_bounded(M: FiniteMonoid, u: Word, bound: int,
                       jobs: int = 1) -> IsotermVerdict:
    """Search every word v != u with con(v) inside con(u) and len(v) <= bound
    for a satisfied identity u = v.

    For a monoid that is not a group only regular identities can hold, so
    candidates with con(v) != con(u) are skipped; for a group the alphabet is
    widened by one fresh variable and the verdict is flagged.  The first
    witness in (length, lexicographic) candidate order is returned.
    """
    if bound < len(u):
        raise BoundTooSmall(f"bound {bound} < len(u) = {len(u)}")
    widened = M.is_group()
    alphabet = sorted(u.content())
    if widened:
        alphabet.append(_fresh_variable(u.content()))
    content_filter = not widened

    k = len(alphabet)
    rows = M.pytable
    one = M.one

    # Fixed assignment stream: sparse assignments first (few slots away from
    # the identity element discriminate immediately on zero-heavy monoids),
    # then systematic coverage for exactness.
    def assignment_stream():
        base = [one] * k
        emitted = 0
        for weight in (1, 2):
            for slots in itertools.combinations(range(k), weight):
                for vals in itertools.product(range(M.size), repeat=weight):
                    asg = base[:]
                    for s, e in zip(slots, vals):
                        asg[s] = e
                    yield tuple(asg)
                    emitted += 1
                    if emitted >= 8192:
                        break
                if emitted >= 8192:
                    break
            if emitted >= 8192:
                break
        yield from itertools.product(range(M.size), repeat=k)

    assignments: list[tuple[int, ...]] = []
    u_vals: list[int] = []
    stream = assignment_stream()
    u_idx = [alphabet.index(a) for a in u.letters]

    def u_val(i: int) -> int:
        while len(u_vals) <= i:
            try:
                asg = next(stream)
            except StopIteration:
                return -1
            assignments.append(asg)
            e = one
            for j in u_idx:
                e = rows[e][asg[j]]
            u_vals.append(e)
        return u_vals[i]

    total = M.size ** k + 8192
    ucontent = u.content()
    for length in range(0, bound + 1):
        for letters in itertools.product(alphabet, repeat=length):
            v = Word(letters)
            if v == u:
                continue
            if content_filter and v.content() != ucontent:
                continue
            v_idx = [alphabet.index(a) for a in letters]
            ok = True
            for i in range(total):
                uv = u_val(i)
                if uv < 0:
                    break
                asg = assignments[i]
                e = one
                for j in v_idx:
                    e = rows[e][asg[j]]
                if e != uv:
                    ok = False
                    break
            if ok:
                return IsotermVerdict("not_isoterm", bound,
                                      witness=Identity(u, v), widened=widened)
    return IsotermVerdict("isoterm_up_to", bound, widened=widened)


# -- b-unstable pairs --------------------------------------------------------------


def _distinct_permutations(letters: tuple[str, ...]) -> list[tuple[str, ...]]:
    return sorted(set(itertools.permutations(letters)))


def is_b_unstable(M: FiniteMonoid, u: Word, x: str, y: str,
                  jobs: int = 1) -> tuple[bool, Optional[Identity]]:
    """True iff M satisfies some block-balanced identity u = v with
    u(x, y) != v(x, y).

    Block-balanced partners of u are exactly the words obtained by permuting
    letters inside each block, which makes the search space finite.
    """
    if x == y:
        raise ValueError("need two distinct variables")
    for z in (x, y):
        if u.occ(z) < 2:
            raise NamedVariableLinear(f"{z!r} is not non-linear in {u!r}")
    decomposition = blocks(u)
    spans = decomposition.block_spans()
    options = [_distinct_permutations(u.letters[s:e]) for s, e in spans]
    base = list(u.letters)
    uxy = delete(u, {x, y})
    for choice in itertools.product(*options):
        letters = base[:]
        for (s, e), perm in zip(spans, choice):
            letters[s:e] = perm
        v = Word(tuple(letters))
        if delete(v, {x, y}) == uxy:
            continue
        candidate = Identity(u, v)
        if satisfies(M, candidate, jobs=jobs):
            return True, candidate
    return False, None


# -- JSON interchange ---------------------------------------------------------------


def monoid_to_json(M: FiniteMonoid) -> dict:
    return {"size": M.size, "one": M.one, "labels": list(M.labels),
            "table": M.table.tolist()}


def monoid_from_json(data: dict, name: Optional[str] = None) -> FiniteMonoid:
    return FiniteMonoid(data["table"], one=data["one"],
                        labels=data.get("labels"), name=name)


def load_monoid(path: str) -> FiniteMonoid:
    with open(path) as fh:
        return monoid_from_json(json.load(fh), name=path)
