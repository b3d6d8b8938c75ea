"""Finite-basis classification for monoids A_0^1 x S(W).

The decision procedure works on word families W whose every adjacent pair
of occurrences of distinct non-linear variables has the {first-of-one,
last-of-the-other} shape (the condition under which S(W) satisfies sigma_1
and sigma_2).  With m the largest power of a single variable occurring as a
factor in W, the product A_0^1 x S(W) is finitely based iff m is infinite
or some d in 1..m leaves b^{m+1-d} T b^d (T nonempty) absent from every
word of W.

The hypothesis checkers for the sufficient-condition theorems are bounded
probes: isoterm and b-unstable questions quantify over unbounded words, so
their verdicts are met / refuted / inconclusive at the stated bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .identities import Identity, SIGMA_1, SIGMA_2, SIGMA_MU, parse_identity
from .monoids import (
    FiniteMonoid,
    IsotermVerdict,
    build_A01,
    build_SW,
    direct_product,
    is_b_unstable,
    is_isoterm_bounded,
    satisfies,
)
from .words import Word, parse_word


class HypothesisViolated(ValueError):
    """W fails the adjacency condition required by the decision theorem."""


class IndexOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class WFamily:
    """Either a finite word set or the symbolic family {a^k b^k : k > 0}
    together with an optional finite part."""

    finite: frozenset[Word] = frozenset()
    power_family: bool = False

    def __post_init__(self):
        if any(len(w) == 0 for w in self.finite):
            raise ValueError("W contains the empty word")

    def sorted_words(self) -> list[Word]:
        return sorted(self.finite, key=lambda w: (len(w), w.letters))

    def __repr__(self) -> str:
        parts = [str(w) for w in self.sorted_words()]
        if self.power_family:
            parts.append("a^k b^k (k > 0)")
        return "W{%s}" % ", ".join(parts)


def wfamily(words: Iterable[Word], power_family: bool = False) -> WFamily:
    return WFamily(frozenset(words), power_family)


# -- Fact w12 -------------------------------------------------------------------


def fact_w12_check(W: WFamily) -> tuple[bool, Optional[dict]]:
    """True iff every adjacent pair of occurrences of two distinct non-linear
    variables in each word of W is of the form {first-of-x, last-of-y}.

    This is exactly the condition for S(W) to satisfy sigma_1 and sigma_2.
    The symbolic a^k b^k part always passes: its only adjacent mixed pair is
    {last a, first b}.  Returns the first violation as a witness.
    """
    for w in W.sorted_words():
        nonlin = w.nonlinear()
        for i in range(len(w) - 1):
            x, y = w.letters[i], w.letters[i + 1]
            if x == y or x not in nonlin or y not in nonlin:
                continue
            ok = (w.is_first(i) and w.is_last(i + 1)) or \
                 (w.is_last(i) and w.is_first(i + 1))
            if not ok:
                return False, {"word": str(w), "position": i,
                               "pair": [repr(w.occ_at(i)), repr(w.occ_at(i + 1))]}
    return True, None


# -- the decision procedure -------------------------------------------------------


@dataclass(frozen=True)
class FBVerdict:
    decision: str  # "FB" | "NFB"
    m: Optional[int]  # None encodes an infinite m (symbolic family)
    witness_d: Optional[int] = None
    blockers: tuple = ()  # per-d covering factors for NFB

    def as_dict(self) -> dict:
        return {"decision": self.decision,
                "m": "infinite" if self.m is None else self.m,
                "witness_d": self.witness_d,
                "blockers": [dict(b) for b in self.blockers]}


def _max_power(w: Word) -> int:
    best, run = 0, 0
    for i, a in enumerate(w.letters):
        run = run + 1 if i and w.letters[i - 1] == a else 1
        best = max(best, run)
    return best


def _find_covering_factor(W: WFamily, p: int, q: int) -> Optional[dict]:
    """A word of W containing b^p T b^q with T nonempty, scanning every
    factorization (T may itself contain b)."""
    for w in W.sorted_words():
        for b in sorted(w.content()):
            starts = [i for i in range(len(w) - p + 1)
                      if all(w.letters[i + k] == b for k in range(p))]
            ends = [j for j in range(len(w) - q + 1)
                    if all(w.letters[j + k] == b for k in range(q))]
            for i in starts:
                for j in ends:
                    if j > i + p:  # nonempty T between the runs
                        return {"word": str(w), "variable": b,
                                "left_run_at": i, "right_run_at": j}
    return None


def theorem_alg_decide(W: WFamily) -> FBVerdict:
    """Decide the finite basis property of A_0^1 x S(W).

    Requires the Fact-w12 adjacency condition (HypothesisViolated
    otherwise).  FB iff m is infinite, or some d in 1..m admits no word of W
    with a factor b^{m+1-d} T b^d; otherwise NFB, with the covering factor
    recorded for every d.
    """
    ok, violation = fact_w12_check(W)
    if not ok:
        raise HypothesisViolated(f"W fails the adjacency condition: {violation}")
    if W.power_family:
        return FBVerdict("FB", None)
    m = max((_max_power(w) for w in W.sorted_words()), default=0)
    if m == 0:
        return FBVerdict("FB", 0)
    blockers = []
    for d in range(1, m + 1):
        hit = _find_covering_factor(W, m + 1 - d, d)
        if hit is None:
            return FBVerdict("FB", m, witness_d=d, blockers=tuple(
                tuple(b.items()) for b in blockers))
        blockers.append({"d": d, **hit})
    return FBVerdict("NFB", m, blockers=tuple(tuple(b.items()) for b in blockers))


# -- the example chain --------------------------------------------------------------


_CHAIN = {
    1: (),
    2: ("ata",),
    3: ("a^2ta",),
    4: ("a^2ta", "ata^2"),
    5: ("a^3ta", "ata^3"),
    6: ("a^3ta", "ata^3", "a^2ta^2"),
    7: ("a^4ta", "ata^4", "a^3ta^2"),
    8: ("a^4ta", "ata^4", "a^3ta^2", "a^2ta^3"),
}


def chain_monoid(k: int) -> WFamily:
    """The word family of the k-th member of the alternating chain
    M_1 = A_0^1, M_2 = A_0^1 x S({ata}), ..."""
    if k not in _CHAIN:
        raise IndexOutOfRange(f"chain index {k} outside 1..8")
    return wfamily(parse_word(t) for t in _CHAIN[k])


def chain_product(k: int) -> FiniteMonoid:
    """The actual monoid A_0^1 x S(W_k) (A_0^1 alone for k = 1)."""
    fam = chain_monoid(k)
    A = build_A01()
    if not fam.finite:
        return A
    return direct_product(A, build_SW(fam.sorted_words()), name=f"M_{k}")


# -- hypothesis checkers -------------------------------------------------------------


@dataclass(frozen=True)
class ClauseReport:
    clause: str
    status: str  # "met" | "refuted" | "inconclusive"
    witnesses: tuple = ()
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"clause": self.clause, "status": self.status,
                "witnesses": [str(w) for w in self.witnesses],
                "notes": list(self.notes)}


@dataclass(frozen=True)
class HypothesisReport:
    theorem: str
    applicable: bool
    clauses: tuple[ClauseReport, ...]

    def as_dict(self) -> dict:
        return {"theorem": self.theorem, "applicable": self.applicable,
                "clauses": [c.as_dict() for c in self.clauses]}


def _aperiodicity_index(M: FiniteMonoid, bound: int) -> Optional[int]:
    """Minimal m <= bound with x^m = x^{m+1} for every element."""
    for m in range(1, bound + 1):
        if all(M.power(e, m) == M.power(e, m + 1) for e in range(M.size)):
            return m
    return None


def _word(text: str) -> Word:
    return parse_word(text)


def check_fbS3(M: FiniteMonoid, search_bound: int = 6) -> HypothesisReport:
    """Probe the hypotheses of the A_0^1-containing-subvariety theorem:
    aperiodicity index m, then a satisfied x^{m-d} t x^d = x^c t x^p with
    0 < d < m and c + p > m."""
    clauses = []
    sigma_ok = satisfies(M, SIGMA_1) and satisfies(M, SIGMA_2)
    clauses.append(ClauseReport("satisfies {sigma_1, sigma_2}",
                                "met" if sigma_ok else "refuted"))
    m = _aperiodicity_index(M, search_bound)
    if m is None:
        clauses.append(ClauseReport(
            "aperiodicity", "inconclusive",
            notes=(f"no m <= {search_bound} with x^m = x^(m+1); "
                   "clause (i) candidate (non-periodic at this bound)",)))
        return HypothesisReport("fbS3", False, tuple(clauses))
    clauses.append(ClauseReport("aperiodicity", "met",
                                witnesses=(f"m = {m}",)))
    witness = None
    for d in range(1, m):
        lhs = _word(f"x^{m - d} t x^{d}")
        for c in range(0, search_bound + 1):
            for p in range(0, search_bound + 1):
                if c + p <= m or (c, p) == (m - d, d):
                    continue
                rhs = _word(f"x^{c} t x^{p}" if c and p else
                            (f"t x^{p}" if p else f"x^{c} t"))
                if satisfies(M, Identity(lhs, rhs)):
                    witness = (d, c, p)
                    break
            if witness:
                break
        if witness:
            break
    if witness:
        d, c, p = witness
        clauses.append(ClauseReport(
            "x^(m-d) t x^d = x^c t x^p with c + p > m", "met",
            witnesses=(f"d={d}, c={c}, p={p}",)))
    else:
        status = "refuted" if m > 1 else "refuted"
        clauses.append(ClauseReport(
            "x^(m-d) t x^d = x^c t x^p with c + p > m", status,
            notes=(f"searched d in 1..{m - 1}, c, p <= {search_bound}",)))
    applicable = sigma_ok and witness is not None
    return HypothesisReport("fbS3", applicable, tuple(clauses))


def _almost_linear_prefixes(x: str, k_bound: int) -> list[Word]:
    """Small generator set of almost-linear words over x and fresh linear
    letters, each containing x."""
    out = []
    for a in range(1, k_bound + 1):
        out.append(_word(f"{x}^{a}"))
        for b in range(1, k_bound):
            if a + b <= k_bound + 1:
                out.append(Word(tuple([x] * a + ["s1"] + [x] * b)))
    return out


def _btlem_condition_ii(M: FiniteMonoid, k: int, prefixes: list[Word]
                        ) -> ClauseReport:
    """If {x, y} is b-unstable in A x y^k then S satisfies
    A x y^c t y^(k-c) = A y x y^(c-1) t y^(k-c) for some 0 < c < k."""
    witnesses = []
    for A in prefixes:
        u = A + Word(("x",)) + Word(("y",) * k)
        unstable, bu_witness = is_b_unstable(M, u, "x", "y")
        if not unstable:
            continue
        found = None
        for c in range(1, k):
            lhs = A + _word(f"x y^{c} t y^{k - c}")
            rhs = A + _word(f"y x y^{c - 1} t y^{k - c}") if c > 1 else \
                A + _word(f"y x t y^{k - c}")
            if satisfies(M, Identity(lhs, rhs)):
                found = (u, c)
                break
        if found is None:
            return ClauseReport(
                f"b-unstable premise at k={k}", "refuted",
                witnesses=(str(u), str(bu_witness)),
                notes=("pair {x,y} b-unstable but no matching identity holds",))
        witnesses.append(f"{found[0]} (c={found[1]})")
    status = "met"
    notes = () if witnesses else ("vacuous: no b-unstable premise held",)
    return ClauseReport(f"condition (ii) at k={k}", status,
                        tuple(witnesses), notes)


def _btlem_condition_iii(M: FiniteMonoid, k: int, suffixes: list[Word]
                         ) -> ClauseReport:
    """Dual condition: if {x, y} is b-unstable in x^k y B then S satisfies
    x^(k-p) t x^p y B = x^(k-p) t x^(p-1) y x B for some 0 < p < k."""
    witnesses = []
    for B in suffixes:
        u = Word(("x",) * k) + Word(("y",)) + B
        unstable, bu_witness = is_b_unstable(M, u, "x", "y")
        if not unstable:
            continue
        found = None
        for p in range(1, k):
            lhs = _word(f"x^{k - p} t x^{p} y") + B
            rhs = (_word(f"x^{k - p} t x^{p - 1} y x") if p > 1 else
                   _word(f"x^{k - p} t y x")) + B
            if satisfies(M, Identity(lhs, rhs)):
                found = (u, p)
                break
        if found is None:
            return ClauseReport(
                f"b-unstable premise (dual) at k={k}", "refuted",
                witnesses=(str(u), str(bu_witness)),
                notes=("pair {x,y} b-unstable but no matching identity holds",))
        witnesses.append(f"{found[0]} (p={found[1]})")
    status = "met"
    notes = () if witnesses else ("vacuous: no b-unstable premise held",)
    return ClauseReport(f"condition (iii) at k={k}", status,
                        tuple(witnesses), notes)


def check_fbtlem1(M: FiniteMonoid, k_bound: int = 3,
                  isoterm_bound: int = 8) -> HypothesisReport:
    """Bounded probe of the first two-non-linear-variable theorem: xy an
    isoterm, and the three conditional clauses on x^m y^n isoterms and
    b-unstable pairs."""
    clauses = []
    sigma_ok = satisfies(M, SIGMA_1) and satisfies(M, SIGMA_2)
    clauses.append(ClauseReport("satisfies {sigma_1, sigma_2}",
                                "met" if sigma_ok else "refuted"))
    xy = is_isoterm_bounded(M, _word("x y"), max(4, k_bound + 1))
    clauses.append(ClauseReport(
        "xy is an isoterm", "met" if xy.is_isoterm() else "refuted",
        witnesses=() if xy.is_isoterm() else (str(xy.witness),)))
    all_met = sigma_ok and xy.is_isoterm()

    # clause (i)
    witnesses_i = []
    refuted_i = None
    for m in range(2, k_bound + 1):
        for n in range(2, k_bound + 1):
            word = _word(f"x^{m} y^{n}")
            verdict = is_isoterm_bounded(M, word, isoterm_bound)
            if verdict.is_isoterm():
                continue
            found = None
            for d in range(1, m):
                for c in range(1, n):
                    lhs = _word(f"x^{d} t1 x^{m - d} y^{n - c} t2 y^{c}")
                    rhs = _word(f"x^{d} t1 y^{n - c} x^{m - d} t2 y^{c}")
                    if satisfies(M, Identity(lhs, rhs)):
                        found = (m, n, d, c)
                        break
                if found:
                    break
            if found is None:
                refuted_i = (word, verdict.witness)
                break
            witnesses_i.append(f"x^{m}y^{n} (d={found[2]}, c={found[3]})")
        if refuted_i:
            break
    if refuted_i:
        clauses.append(ClauseReport(
            "condition (i)", "refuted",
            witnesses=(str(refuted_i[0]), str(refuted_i[1])),
            notes=("x^m y^n not an isoterm but no swap identity holds",)))
        all_met = False
    else:
        clauses.append(ClauseReport(
            "condition (i)", "met", tuple(witnesses_i),
            () if witnesses_i else ("vacuous: every probed x^m y^n is an isoterm",)))

    prefixes = _almost_linear_prefixes("x", k_bound)
    suffixes = [w.reverse() for w in _almost_linear_prefixes("y", k_bound)]
    for k in range(2, k_bound + 1):
        rep = _btlem_condition_ii(M, k, prefixes)
        clauses.append(rep)
        all_met = all_met and rep.status == "met"
        rep = _btlem_condition_iii(M, k, suffixes)
        clauses.append(rep)
        all_met = all_met and rep.status == "met"
    return HypothesisReport("fbtlem1", all_met, tuple(clauses))


def check_fbtlem(M: FiniteMonoid, m: int, k_bound: Optional[int] = None,
                 isoterm_bound: Optional[int] = None) -> HypothesisReport:
    """Bounded probe of the second theorem: x^m y^m an isoterm plus one of
    the 2m swap identities, then the dual b-unstable conditions."""
    if isoterm_bound is None:
        isoterm_bound = 2 * m + 4
    if k_bound is None:
        k_bound = m
    clauses = []
    sigma_ok = satisfies(M, SIGMA_1) and satisfies(M, SIGMA_2)
    clauses.append(ClauseReport("satisfies {sigma_1, sigma_2}",
                                "met" if sigma_ok else "refuted"))
    word = _word(f"x^{m} y^{m}")
    verdict = is_isoterm_bounded(M, word, isoterm_bound)
    clauses.append(ClauseReport(
        f"x^{m} y^{m} is an isoterm",
        "met" if verdict.is_isoterm() else "refuted",
        witnesses=() if verdict.is_isoterm() else (str(verdict.witness),)))
    all_met = sigma_ok and verdict.is_isoterm()

    hypothesis_identities = []
    for d in range(1, m + 1):
        lhs1 = _word(f"x^{m + 1 - d} t1 x^{d} y t2 y")
        rhs1 = (_word(f"x^{m + 1 - d} t1 x^{d - 1} y x t2 y") if d > 1 else
                _word(f"x^{m + 1 - d} t1 y x t2 y"))
        hypothesis_identities.append(Identity(lhs1, rhs1))
        lhs2 = _word(f"x t1 x y^{d} t2 y^{m + 1 - d}")
        rhs2 = (_word(f"x t1 y x y^{d - 1} t2 y^{m + 1 - d}") if d > 1 else
                _word(f"x t1 y x t2 y^{m + 1 - d}"))
        hypothesis_identities.append(Identity(lhs2, rhs2))
    sat = [ident for ident in hypothesis_identities if satisfies(M, ident)]
    if sat:
        clauses.append(ClauseReport("one of the swap identities holds", "met",
                                    tuple(str(i) for i in sat)))
    else:
        clauses.append(ClauseReport(
            "one of the swap identities holds", "refuted",
            tuple(str(i) for i in hypothesis_identities)))
        all_met = False

    if m > 1:
        prefixes = _almost_linear_prefixes("x", k_bound)
        suffixes = [w.reverse() for w in _almost_linear_prefixes("y", k_bound)]
        for k in range(2, m + 1):
            rep = _btlem_condition_ii(M, k, prefixes)
            clauses.append(rep)
            all_met = all_met and rep.status == "met"
            rep = _btlem_condition_iii(M, k, suffixes)
            clauses.append(rep)
            all_met = all_met and rep.status == "met"
    return HypothesisReport("fbtlem", all_met, tuple(clauses))


OMEGA = (
    Identity(parse_word("t1 x t2 x t3 x"), parse_word("x^3 t1 t2 t3"),
             name="collect_three"),
    parse_identity("x^3 == x^4"),
    SIGMA_MU,
    Identity(parse_word("y x x t y"), parse_word("x x y t y"), name="pair_mover"),
)


def check_abtab(M: FiniteMonoid, isoterm_bound: int = 7) -> HypothesisReport:
    """Bounded probe of the compact-identity theorem: membership in Omega
    plus one of the two isoterm conditions."""
    clauses = []
    omega_ok = True
    for ident in OMEGA:
        ok = satisfies(M, ident)
        omega_ok = omega_ok and ok
        clauses.append(ClauseReport(f"satisfies {ident}", "met" if ok else "refuted"))
    v1 = is_isoterm_bounded(M, _word("x y t y x"), isoterm_bound)
    v2 = is_isoterm_bounded(M, _word("x y t x y"), isoterm_bound)
    clauses.append(ClauseReport(
        "clause (i): xytyx and xytxy are isoterms",
        "met" if v1.is_isoterm() and v2.is_isoterm() else "refuted",
        witnesses=tuple(str(v.witness) for v in (v1, v2) if not v.is_isoterm())))
    v3 = is_isoterm_bounded(M, _word("x y z t x z y"), isoterm_bound)
    clauses.append(ClauseReport(
        "clause (ii): xyztxzy is an isoterm",
        "met" if v3.is_isoterm() else "refuted",
        witnesses=() if v3.is_isoterm() else (str(v3.witness),)))
    applicable = omega_ok and ((v1.is_isoterm() and v2.is_isoterm())
                               or v3.is_isoterm())
    return HypothesisReport("abtab", applicable, tuple(clauses))
