"""Identities between words and their structural properties.

An identity is an ordered pair of words u = v.  All the classification
predicates here are word-combinatorial: regularity and balance, the block
and 12-block refinements, the first/last-occurrence order properties
(P_{1,1}, P_{2,2}, P_{1,2}, P_{1,mu}, P_{mu,2}), the P_n deletion
properties, unstable/critical occurrence pairs, and the sigma-good/bad
typing of occurrence pairs that governs which adjacent swaps the pivotal
identities sigma_1, sigma_mu, sigma_2 can perform.

Occurrence identification across a balanced identity is positional by
variable: the i-th occurrence of x on the left is identified with the i-th
occurrence of x on the right.  No other alignment is used.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .words import (
    EMPTY,
    OccRef,
    Word,
    blocks,
    delete,
    parse_word,
)


class NotBalanced(ValueError):
    """Operation requires a balanced identity."""


class InvalidPair(ValueError):
    """A pair of occurrence references failed validation."""


class PartialSubstitution(ValueError):
    """A substitution is not total on the content of the identity."""


@dataclass(frozen=True)
class Identity:
    lhs: Word
    rhs: Word
    name: Optional[str] = field(default=None, compare=False)
    is_canonical: bool = field(default=False, compare=False)

    def __repr__(self) -> str:
        tag = f" [{self.name}]" if self.name else ""
        return f"<{self.lhs} == {self.rhs}{tag}>"

    def __str__(self) -> str:
        return f"{self.lhs} == {self.rhs}"

    def is_trivial(self) -> bool:
        return self.lhs == self.rhs

    def content(self) -> frozenset[str]:
        return self.lhs.content() | self.rhs.content()

    def swapped(self) -> "Identity":
        return Identity(self.rhs, self.lhs, name=self.name)

    def reverse(self) -> "Identity":
        return Identity(self.lhs.reverse(), self.rhs.reverse(), name=self.name)


def parse_identity(text: str, compact_powers: bool = False) -> Identity:
    """Parse ``<word> == <word>`` (a bare ``=`` is accepted as well)."""
    if "==" in text:
        left, right = text.split("==", 1)
    elif "=" in text:
        left, right = text.split("=", 1)
    else:
        raise ValueError(f"no '==' in identity text {text!r}")
    return Identity(parse_word(left, compact_powers), parse_word(right, compact_powers))


def I(text: str) -> Identity:
    """Shorthand parser used throughout the tests."""
    return parse_identity(text)


# The three pivotal identities.
SIGMA_1 = Identity(parse_word("x y t1 x t2 y"), parse_word("y x t1 x t2 y"), name="sigma_1")
SIGMA_MU = Identity(parse_word("x t1 x y t2 y"), parse_word("x t1 y x t2 y"), name="sigma_mu")
SIGMA_2 = Identity(parse_word("x t1 y t2 x y"), parse_word("x t1 y t2 y x"), name="sigma_2")
SIGMAS = {"sigma_1": SIGMA_1, "sigma_mu": SIGMA_MU, "sigma_2": SIGMA_2}


# -- canonical renaming -------------------------------------------------------


def _canonical_names() -> Iterable[str]:
    yield from string.ascii_lowercase
    for i in itertools.count(26):
        yield f"v{i}"


def canonical_renaming(ident: Identity) -> dict[str, str]:
    """Variables in order of first appearance in lhs then rhs, mapped to a
    fixed enumeration (a, b, c, ...)."""
    order: list[str] = []
    seen: set[str] = set()
    for a in itertools.chain(ident.lhs.letters, ident.rhs.letters):
        if a not in seen:
            seen.add(a)
            order.append(a)
    return dict(zip(order, _canonical_names()))


def rename(ident: Identity, mapping: Mapping[str, str]) -> Identity:
    lhs = Word(tuple(mapping.get(a, a) for a in ident.lhs.letters))
    rhs = Word(tuple(mapping.get(a, a) for a in ident.rhs.letters))
    return replace(ident, lhs=lhs, rhs=rhs)


def canonicalize(ident: Identity) -> Identity:
    out = rename(ident, canonical_renaming(ident))
    return replace(out, is_canonical=True)


# -- elementary predicates -----------------------------------------------------


def is_regular(ident: Identity) -> bool:
    return ident.lhs.content() == ident.rhs.content()


def is_balanced(ident: Identity) -> bool:
    u, v = ident.lhs, ident.rhs
    if u.content() != v.content():
        return False
    return all(u.occ(x) == v.occ(x) for x in u.content())


def is_block_balanced(ident: Identity) -> bool:
    """For each variable x: u(x, lin(u)) = v(x, lin(u))."""
    u, v = ident.lhs, ident.rhs
    lin_u = u.linear()
    for x in u.content() | v.content():
        keep = lin_u | {x}
        if delete(u, keep) != delete(v, keep):
            return False
    return True


def is_almost_linear_identity(ident: Identity) -> bool:
    return ident.lhs.is_almost_linear() and ident.rhs.is_almost_linear()


def is_p_n(ident: Identity, n: int) -> bool:
    """Regular and u restricted to its <=n-occurring variables equals v
    restricted to v's own <=n-occurring variables."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_regular(ident):
        return False
    u, v = ident.lhs, ident.rhs
    return delete(u, u.con_n(n)) == delete(v, v.con_n(n))


def is_p1(ident: Identity) -> bool:
    return is_p_n(ident, 1)


def _lin_non_agree(ident: Identity) -> bool:
    u, v = ident.lhs, ident.rhs
    return u.linear() == v.linear() and u.nonlinear() == v.nonlinear()


def _first(w: Word, x: str) -> int:
    return w.positions(x)[0]


def _last(w: Word, x: str) -> int:
    return w.positions(x)[-1]


def is_p12(ident: Identity) -> bool:
    """lin/non sets agree and, for all x, y: the first occurrence of x
    precedes the last occurrence of y on one side iff it does on the other."""
    if not _lin_non_agree(ident):
        return False
    u, v = ident.lhs, ident.rhs
    for x in u.content():
        for y in u.content():
            if (_first(u, x) < _last(u, y)) != (_first(v, x) < _last(v, y)):
                return False
    return True


def is_p11(ident: Identity) -> bool:
    """lin/non sets agree and the order of first occurrences is the same."""
    if not _lin_non_agree(ident):
        return False
    u, v = ident.lhs, ident.rhs
    for x, y in itertools.combinations(u.content(), 2):
        if (_first(u, x) < _first(u, y)) != (_first(v, x) < _first(v, y)):
            return False
    return True


def is_p22(ident: Identity) -> bool:
    """lin/non sets agree and the order of last occurrences is the same."""
    if not _lin_non_agree(ident):
        return False
    u, v = ident.lhs, ident.rhs
    for x, y in itertools.combinations(u.content(), 2):
        if (_last(u, x) < _last(u, y)) != (_last(v, x) < _last(v, y)):
            return False
    return True


def is_p1mu(ident: Identity) -> bool:
    """Balanced, and first-of-x vs i-th-of-y orders agree for all x, y, i."""
    if not is_balanced(ident):
        return False
    u, v = ident.lhs, ident.rhs
    for x in u.content():
        for y in u.content():
            if x == y:
                continue
            for i in range(1, u.occ(y) + 1):
                pu = u.positions(y)[i - 1]
                pv = v.positions(y)[i - 1]
                if (_first(u, x) < pu) != (_first(v, x) < pv):
                    return False
    return True


def is_pmu2(ident: Identity) -> bool:
    """Balanced, and i-th-of-x vs last-of-y orders agree for all x, y, i."""
    if not is_balanced(ident):
        return False
    u, v = ident.lhs, ident.rhs
    for x in u.content():
        for y in u.content():
            if x == y:
                continue
            for i in range(1, u.occ(x) + 1):
                pu = u.positions(x)[i - 1]
                pv = v.positions(x)[i - 1]
                if (pu < _last(u, y)) != (pv < _last(v, y)):
                    return False
    return True


def is_p1b(ident: Identity) -> bool:
    """lin/non sets agree, linear skeletons agree, and every variable whose
    one-variable projection differs across the identity sits inside a single
    block on each side."""
    if not _lin_non_agree(ident):
        return False
    u, v = ident.lhs, ident.rhs
    lin_u = u.linear()
    if delete(u, lin_u) != delete(v, lin_u):
        return False
    for x in u.nonlinear():
        keep = lin_u | {x}
        if delete(u, keep) == delete(v, keep):
            continue
        for w in (u, v):
            spans = blocks(w).block_spans()
            pos = w.positions(x)
            if not any(s <= pos[0] and pos[-1] < e for s, e in spans):
                return False
    return True


def is_n_limited_identity(ident: Identity, n: int) -> bool:
    return ident.lhs.is_n_limited(n) and ident.rhs.is_n_limited(n)


def is_compact_identity(ident: Identity) -> bool:
    from .words import is_compact

    return is_compact(ident.lhs) and is_compact(ident.rhs)


# -- classification report ----------------------------------------------------


@dataclass(frozen=True)
class PropertyReport:
    regular: bool
    balanced: bool
    block_balanced: bool
    almost_linear: bool
    p1: bool
    p1b: bool
    p12: bool
    p11: bool
    p22: bool
    p1mu: bool
    pmu2: bool
    compact: bool
    p_n: Optional[bool] = None
    n_limited: Optional[bool] = None
    n: Optional[int] = None
    reasons: Mapping[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "regular": self.regular,
            "balanced": self.balanced,
            "block_balanced": self.block_balanced,
            "almost_linear": self.almost_linear,
            "p1": self.p1,
            "p1b": self.p1b,
            "p12": self.p12,
            "p11": self.p11,
            "p22": self.p22,
            "p1mu": self.p1mu,
            "pmu2": self.pmu2,
            "compact": self.compact,
        }
        if self.n is not None:
            out["n"] = self.n
            out["p_n"] = self.p_n
            out["n_limited"] = self.n_limited
        if self.reasons:
            out["reasons"] = dict(self.reasons)
        return out


def classify(ident: Identity, n: Optional[int] = None) -> PropertyReport:
    """Compute the full battery of structural flags.

    Flags whose definition requires balance (P_1mu, P_mu2) are reported
    false with a reason when the identity is unbalanced; P_12, P_11, P_22
    and P_1 are defined without balance and are computed regardless.
    """
    balanced = is_balanced(ident)
    reasons: dict[str, str] = {}
    if not balanced:
        reasons["p1mu"] = reasons["pmu2"] = "identity is not balanced"
    return PropertyReport(
        regular=is_regular(ident),
        balanced=balanced,
        block_balanced=is_block_balanced(ident),
        almost_linear=is_almost_linear_identity(ident),
        p1=is_p1(ident),
        p1b=is_p1b(ident),
        p12=is_p12(ident),
        p11=is_p11(ident),
        p22=is_p22(ident),
        p1mu=is_p1mu(ident),
        pmu2=is_pmu2(ident),
        compact=is_compact_identity(ident),
        p_n=None if n is None else is_p_n(ident, n),
        n_limited=None if n is None else is_n_limited_identity(ident, n),
        n=n,
        reasons=reasons,
    )


# -- unstable / critical pairs -------------------------------------------------


@dataclass(frozen=True)
class UnstablePair:
    """An unstable pair {left, right} with left <_u right (in the lhs)."""

    left: OccRef
    right: OccRef
    critical: bool  # adjacent in the lhs

    def as_set(self) -> frozenset[OccRef]:
        return frozenset((self.left, self.right))


@dataclass(frozen=True)
class UnstablePairSet:
    identity: Identity
    pairs: tuple[UnstablePair, ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def as_sets(self) -> frozenset[frozenset[OccRef]]:
        return frozenset(p.as_set() for p in self.pairs)

    def critical_pairs(self) -> tuple[UnstablePair, ...]:
        return tuple(p for p in self.pairs if p.critical)


def _require_balanced(ident: Identity) -> None:
    if not is_balanced(ident):
        raise NotBalanced(f"{ident!r} is not balanced")


def unstable_pairs(ident: Identity) -> UnstablePairSet:
    """ch(u = v): all pairs of occurrences whose relative order differs
    between the two sides of a balanced identity."""
    _require_balanced(ident)
    u, v = ident.lhs, ident.rhs
    refs = u.occ_refs()
    out = []
    for i, j in itertools.combinations(range(len(refs)), 2):
        c, d = refs[i], refs[j]
        if c.variable == d.variable:
            continue
        if v.position_of(c) > v.position_of(d):
            out.append(UnstablePair(c, d, critical=(j == i + 1)))
    return UnstablePairSet(ident, tuple(out))


def find_critical_pair(ident: Identity) -> Optional[UnstablePair]:
    """Leftmost adjacent unstable pair; None iff the identity is trivial.

    Existence for every nontrivial balanced identity is the content of the
    critical-pair lemma and is exercised as a property test.
    """
    _require_balanced(ident)
    u, v = ident.lhs, ident.rhs
    refs = u.occ_refs()
    for i in range(len(refs) - 1):
        c, d = refs[i], refs[i + 1]
        if c.variable == d.variable:
            continue
        if v.position_of(c) > v.position_of(d):
            return UnstablePair(c, d, critical=True)
    return None


# -- sigma-good / sigma-bad typing ---------------------------------------------


def _normalize_sigma_set(sigma: Iterable) -> frozenset[str]:
    names = set()
    for s in sigma:
        if isinstance(s, Identity):
            s = s.name
        if s not in SIGMAS:
            raise ValueError(f"unknown sigma identity {s!r}")
        names.add(s)
    return frozenset(names)


def sigma_type(u: Word, pair: tuple[OccRef, OccRef], sigma: Iterable) -> str:
    """Classify a pair of occurrences of distinct non-linear variables as
    'good' or 'bad' for a subset of {sigma_1, sigma_mu, sigma_2}.

    A pair is Sigma-good exactly when some member of Sigma (applied in one
    of the two directions) can swap it once adjacent; the full set makes
    every pair good, the empty set makes every pair bad.
    """
    names = _normalize_sigma_set(sigma)
    c, d = pair
    if c.variable == d.variable:
        raise InvalidPair("pair must involve two distinct variables")
    for r in (c, d):
        if u.occ(r.variable) < 2:
            raise InvalidPair(f"{r.variable!r} is not non-linear in {u!r}")
        if r.index > u.occ(r.variable):
            raise InvalidPair(f"{r} does not resolve in {u!r}")

    def first(r: OccRef) -> bool:
        return r.index == 1

    def last(r: OccRef) -> bool:
        return r.index == u.occ(r.variable)

    if names == frozenset(("sigma_1", "sigma_mu", "sigma_2")):
        return "good"
    if not names:
        return "bad"
    bad = False
    if names == frozenset(("sigma_mu", "sigma_2")):
        bad = first(c) and first(d)
    elif names == frozenset(("sigma_1", "sigma_mu")):
        bad = last(c) and last(d)
    elif names == frozenset(("sigma_1", "sigma_2")):
        bad = (first(c) and last(d)) or (last(c) and first(d))
    elif names == frozenset(("sigma_mu",)):
        bad = (first(c) and first(d)) or (last(c) and last(d))
    elif names == frozenset(("sigma_2",)):
        bad = first(c) or first(d)
    elif names == frozenset(("sigma_1",)):
        bad = last(c) or last(d)
    return "bad" if bad else "good"


def blbal1_condition(ident: Identity, sigma: Iterable) -> bool:
    """True iff the identity is block-balanced and every Sigma-bad pair of
    occurrences of distinct non-linear variables in the lhs is stable."""
    names = _normalize_sigma_set(sigma)
    if not is_block_balanced(ident):
        return False
    u, v = ident.lhs, ident.rhs
    nonlin = u.nonlinear()
    refs = [r for r in u.occ_refs() if r.variable in nonlin]
    for c, d in itertools.combinations(refs, 2):
        if c.variable == d.variable:
            continue
        if sigma_type(u, (c, d), names) == "bad":
            if (u.position_of(c) < u.position_of(d)) != (
                    v.position_of(c) < v.position_of(d)):
                return False
    return True


# -- substitution --------------------------------------------------------------


def substitute_word(w: Word, theta: Mapping[str, Word]) -> Word:
    return Word(tuple(itertools.chain.from_iterable(
        theta[a].letters for a in w.letters)))


def substitute(ident: Identity, theta: Mapping[str, Word],
               allow_empty: bool = False) -> Identity:
    """Apply a substitution (homomorphism of the free monoid) to both sides.

    Images must be nonempty words unless ``allow_empty`` is set (monoid
    substitution).  Raises PartialSubstitution when theta misses a variable
    of the identity.
    """
    missing = ident.content() - set(theta)
    if missing:
        raise PartialSubstitution(f"no image for {sorted(missing)}")
    if not allow_empty:
        empties = [a for a in ident.content() if not theta[a]]
        if empties:
            raise PartialSubstitution(
                f"empty image for {sorted(empties)} (set allow_empty for "
                f"monoid substitutions)")
    return Identity(substitute_word(ident.lhs, theta),
                    substitute_word(ident.rhs, theta))
