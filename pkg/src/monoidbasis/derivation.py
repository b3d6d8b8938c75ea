"""Rewriting over identity systems and constructive derivations.

A rewrite system is the delta-closure of a finite identity set: every
identity obtained by deleting an arbitrary subset of variables from both
sides, canonicalized, with trivial members dropped.  Rules apply in both
directions at any position under any substitution of the rule's variables
by nonempty words, which is exactly equational derivation over the closure
(monoid substitutions with empty images are realised by the closure
itself).

Traces record every step (rule, direction, position, substitution) and
replay exactly.  Tie-breaks are uniform: rule order, forward before
backward, leftmost match, shortest substitution images first.

The constructive procedures implement the measure-decreasing derivation
drivers: swapping critical pairs shrinks the unstable-pair set for
block-balanced inputs, the typed driver adds staged handlers, compaction
pushes second occurrences together, the insertion lemma grows A B x C into
A x B x C one crossing at a time, and the J_3 pipeline normalizes
first/last occurrence orders and aligns 12-block contents, with a bounded
bidirectional BFS as a fallback for small stalls.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .identities import (
    Identity,
    InvalidPair,
    NotBalanced,
    SIGMA_1,
    SIGMA_2,
    SIGMA_MU,
    UnstablePair,
    canonicalize,
    find_critical_pair,
    is_balanced,
    is_block_balanced,
    is_p12,
    substitute_word,
    unstable_pairs,
)
from .words import EMPTY, OccRef, Word, is_compact, parse_word, subword_key


class NotBlockBalanced(ValueError):
    pass


class PropertyViolated(ValueError):
    pass


class NotTwoLimited(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


class NotInJ3(ValueError):
    pass


class ReplayError(ValueError):
    """A trace step does not apply where it claims to."""


class StepRuleFailedToDecrease(RuntimeError):
    """A measure-decreasing instantiation failed its contract (a bug in the
    instantiation, not in the input)."""


class DerivationNotFound(RuntimeError):
    """Structured pipeline stalled and the bounded fallback search failed."""


# -- rewrite systems -----------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    name: str
    ident: Identity  # canonicalized
    base: str
    deleted: frozenset[str]


@dataclass(frozen=True)
class RewriteSystem:
    base: tuple[Identity, ...]
    rules: tuple[Rule, ...]

    def rule(self, name: str) -> Rule:
        table = getattr(self, "_by_name", None)
        if table is None:
            table = {r.name: r for r in self.rules}
            object.__setattr__(self, "_by_name", table)
        return table[name]

    def __len__(self) -> int:
        return len(self.rules)


def delta_closure(idents: Iterable[Identity]) -> RewriteSystem:
    """Close a finite identity set under deleting variable subsets.

    Members are canonicalized and deduplicated; trivial identities are
    dropped.  Rule names carry the base identity and the deleted variables.
    """
    base = tuple(idents)
    rules: list[Rule] = []
    seen: set[tuple[tuple[str, ...], tuple[str, ...]]] = set()
    for i, ident in enumerate(base):
        bname = ident.name or f"id{i}"
        content = sorted(ident.content())
        for r in range(len(content) + 1):
            for dropped in itertools.combinations(content, r):
                keep = set(content) - set(dropped)
                lhs = Word(tuple(a for a in ident.lhs.letters if a in keep))
                rhs = Word(tuple(a for a in ident.rhs.letters if a in keep))
                if lhs == rhs:
                    continue
                cand = canonicalize(Identity(lhs, rhs))
                key = (cand.lhs.letters, cand.rhs.letters)
                if key in seen:
                    continue
                seen.add(key)
                name = bname if not dropped else f"{bname}[-{','.join(dropped)}]"
                rules.append(Rule(name, cand, bname, frozenset(dropped)))
    return RewriteSystem(base, tuple(rules))


@lru_cache(maxsize=None)
def sigma_system(names: tuple[str, ...] = ("sigma_1", "sigma_mu", "sigma_2")) -> RewriteSystem:
    pool = {"sigma_1": SIGMA_1, "sigma_mu": SIGMA_MU, "sigma_2": SIGMA_2}
    return delta_closure([pool[n] for n in names])


# Compaction system: sigma_mu plus the block mover yxxty = xxyty.
PAIR_MOVER = Identity(parse_word("y x x t y"), parse_word("x x y t y"),
                      name="pair_mover")

# J_3 basis: the duplication identity, the two insertion identities, and the
# Sigma / Delta swap families.
DUP = Identity(parse_word("x t1 x t2 x"), parse_word("x t1 x x t2 x"), name="dup")
INS_L = Identity(parse_word("x t1 y x x t2 y"), parse_word("x t1 x y x x t2 y"),
                 name="ins_l")
INS_R = Identity(parse_word("y t1 x x y t2 x"), parse_word("y t1 x x y x t2 x"),
                 name="ins_r")
J3_SIGMA = (
    Identity(parse_word("x y x y t1 x t2 y"), parse_word("y x y x t1 x t2 y"),
             name="j3_sigma_1"),
    Identity(parse_word("x t1 y t2 x y x y"), parse_word("x t1 y t2 y x y x"),
             name="j3_sigma_2"),
)
J3_DELTA = (
    Identity(parse_word("x t1 y t2 x y t3 x t4 y"),
             parse_word("x t1 y t2 y x t3 x t4 y"), name="j3_delta_1"),
    Identity(parse_word("x t1 y t2 x y t3 y t4 x"),
             parse_word("x t1 y t2 y x t3 y t4 x"), name="j3_delta_2"),
)
J3_BASIS = (DUP, INS_L, INS_R) + J3_SIGMA + J3_DELTA


@lru_cache(maxsize=None)
def compact_system() -> RewriteSystem:
    return delta_closure([SIGMA_MU, PAIR_MOVER])


@lru_cache(maxsize=None)
def axil_system() -> RewriteSystem:
    return delta_closure([DUP, INS_L])


@lru_cache(maxsize=None)
def j3_system() -> RewriteSystem:
    return delta_closure(list(J3_BASIS))


# -- matching and steps -----------------------------------------------------------


def match_pattern(pattern: tuple[str, ...], target: tuple[str, ...]
                  ) -> Iterator[dict[str, tuple[str, ...]]]:
    """All substitutions theta with nonempty images and theta(pattern) ==
    target; image lengths are tried ascending."""

    def rec(i: int, j: int, binding: dict[str, tuple[str, ...]]):
        if i == len(pattern):
            if j == len(target):
                yield dict(binding)
            return
        v = pattern[i]
        bound = binding.get(v)
        if bound is not None:
            l = len(bound)
            if target[j:j + l] == bound:
                yield from rec(i + 1, j + l, binding)
            return
        rest_min = sum(len(binding[w]) if w in binding else 1
                       for w in pattern[i + 1:])
        for l in range(1, len(target) - j - rest_min + 1):
            binding[v] = target[j:j + l]
            yield from rec(i + 1, j + l, binding)
            del binding[v]

    yield from rec(0, 0, {})


@dataclass(frozen=True)
class Step:
    rule: str
    forward: bool
    pos: int
    subst: tuple[tuple[str, tuple[str, ...]], ...]  # sorted by variable

    def theta(self) -> dict[str, Word]:
        return {v: Word(img) for v, img in self.subst}

    def inverted(self) -> "Step":
        return Step(self.rule, not self.forward, self.pos, self.subst)


def _freeze_subst(theta: dict[str, tuple[str, ...]]) -> tuple:
    return tuple(sorted(theta.items()))


def step_sides(step: Step, system: RewriteSystem) -> tuple[Word, Word]:
    rule = system.rule(step.rule)
    if step.forward:
        return rule.ident.lhs, rule.ident.rhs
    return rule.ident.rhs, rule.ident.lhs


def apply_step(w: Word, step: Step, system: RewriteSystem) -> Word:
    src, dst = step_sides(step, system)
    theta = step.theta()
    image = substitute_word(src, theta)
    if w.letters[step.pos:step.pos + len(image)] != image.letters:
        raise ReplayError(f"step {step} does not match {w} at {step.pos}")
    out = substitute_word(dst, theta)
    return Word(w.letters[:step.pos] + out.letters + w.letters[step.pos + len(image):])


def iter_steps(w: Word, system: RewriteSystem
               ) -> Iterator[tuple[Step, Word]]:
    """All single rewrite steps on w, in deterministic order."""
    n = len(w)
    for rule in system.rules:
        for forward in (True, False):
            src = rule.ident.lhs if forward else rule.ident.rhs
            dst = rule.ident.rhs if forward else rule.ident.lhs
            min_len = len(src)
            for pos in range(n):
                for end in range(pos + min_len, n + 1):
                    for theta in match_pattern(src.letters, w.letters[pos:end]):
                        out = substitute_word(dst, {v: Word(t) for v, t in theta.items()})
                        result = Word(w.letters[:pos] + out.letters + w.letters[end:])
                        yield Step(rule.name, forward, pos, _freeze_subst(theta)), result


def rewrite_neighbors(w: Word, system: RewriteSystem) -> frozenset[Word]:
    """All words reachable from w by one application of one closure rule."""
    return frozenset(result for _, result in iter_steps(w, system))


def find_step(w: Word, target: Word, system: RewriteSystem) -> Optional[Step]:
    """First single step transforming w into target, if any.

    The matched factor must cover every position where the words differ, so
    the search is restricted to the differing window.
    """
    if w == target:
        return None
    lw, lt = len(w), len(target)
    p = 0
    while p < min(lw, lt) and w.letters[p] == target.letters[p]:
        p += 1
    s = 0
    while s < min(lw, lt) - p and w.letters[lw - 1 - s] == target.letters[lt - 1 - s]:
        s += 1
    for rule in system.rules:
        for forward in (True, False):
            src = rule.ident.lhs if forward else rule.ident.rhs
            dst = rule.ident.rhs if forward else rule.ident.lhs
            min_len = len(src)
            for pos in range(p + 1):
                for end in range(max(pos + min_len, lw - s), lw + 1):
                    tslice = target.letters[pos:end + lt - lw]
                    for theta in match_pattern(src.letters, w.letters[pos:end]):
                        out = substitute_word(dst, {v: Word(t) for v, t in theta.items()})
                        if out.letters == tslice:
                            return Step(rule.name, forward, pos, _freeze_subst(theta))
    return None


# -- traces --------------------------------------------------------------------


@dataclass(frozen=True)
class DerivationTrace:
    start: Word
    steps: tuple[Step, ...]
    end: Word

    def __len__(self) -> int:
        return len(self.steps)

    def words(self, system: RewriteSystem) -> list[Word]:
        out = [self.start]
        for st in self.steps:
            out.append(apply_step(out[-1], st, system))
        return out

    def replay(self, system: RewriteSystem) -> Word:
        """Re-apply every step; raises ReplayError on any mismatch."""
        w = self.words(system)[-1]
        if w != self.end:
            raise ReplayError(f"trace ends at {w}, expected {self.end}")
        return w


def invert_trace(trace: DerivationTrace, system: RewriteSystem) -> DerivationTrace:
    trace.replay(system)
    return DerivationTrace(trace.end,
                           tuple(st.inverted() for st in reversed(trace.steps)),
                           trace.start)


def concat_traces(a: DerivationTrace, b: DerivationTrace) -> DerivationTrace:
    if a.end != b.start:
        raise ValueError("traces do not compose")
    return DerivationTrace(a.start, a.steps + b.steps, b.end)


def _seq_to_trace(words: Sequence[Word], system: RewriteSystem) -> DerivationTrace:
    """Turn an explicit word sequence into a trace, finding each step."""
    steps = []
    for a, b in zip(words, words[1:]):
        if a == b:
            continue
        st = find_step(a, b, system)
        if st is None:
            raise DerivationNotFound(f"no single step from {a} to {b}")
        steps.append(st)
    return DerivationTrace(words[0], tuple(steps), words[-1])


def trace_to_jsonl(trace: DerivationTrace) -> str:
    lines = [json.dumps({"type": "trace", "start": str(trace.start),
                         "end": str(trace.end), "steps": len(trace.steps)})]
    for st in trace.steps:
        lines.append(json.dumps({
            "type": "step", "rule": st.rule,
            "direction": "forward" if st.forward else "backward",
            "pos": st.pos,
            "subst": {v: " ".join(img) for v, img in st.subst},
        }))
    return "\n".join(lines) + "\n"


def trace_from_jsonl(text: str) -> DerivationTrace:
    header = None
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        if data["type"] == "trace":
            header = data
        elif data["type"] == "step":
            subst = tuple(sorted(
                (v, tuple(img.split())) for v, img in data["subst"].items()))
            steps.append(Step(data["rule"], data["direction"] == "forward",
                              data["pos"], subst))
    if header is None:
        raise ValueError("missing trace header line")
    return DerivationTrace(parse_word(header["start"]), tuple(steps),
                           parse_word(header["end"]))


# -- bounded bidirectional search ---------------------------------------------


def derivable(ident: Identity, system: RewriteSystem,
              max_len: Optional[int] = None, max_depth: int = 12,
              max_states: int = 200_000) -> Optional[DerivationTrace]:
    """Bidirectional BFS for a derivation of lhs = rhs over the system.

    ``max_depth`` bounds the depth of each search frontier, so found
    derivations have at most ``2 * max_depth`` steps; ``max_len`` bounds
    intermediate word length (default: longest side + 2).  ``None`` means
    "not found within bounds" and never claims underivability.
    """
    u, v = ident.lhs, ident.rhs
    if u == v:
        return DerivationTrace(u, (), v)
    if max_len is None:
        max_len = max(len(u), len(v)) + 2

    parents: list[dict[Word, Optional[tuple[Word, Step]]]] = [{u: None}, {v: None}]
    frontiers: list[list[Word]] = [[u], [v]]
    depths = [0, 0]

    def build(meet: Word) -> DerivationTrace:
        left: list[tuple[Word, Step]] = []
        w = meet
        while parents[0][w] is not None:
            pw, st = parents[0][w]
            left.append((pw, st))
            w = pw
        left.reverse()
        steps = [st for _, st in left]
        right: list[Step] = []
        w = meet
        while parents[1][w] is not None:
            pw, st = parents[1][w]
            right.append(st.inverted())
            w = pw
        return DerivationTrace(u, tuple(steps + right), v)

    while frontiers[0] or frontiers[1]:
        side = 0 if (frontiers[0] and (depths[0] <= depths[1] or not frontiers[1])) else 1
        if depths[side] >= max_depth:
            frontiers[side] = []
            continue
        depths[side] += 1
        new_front: list[Word] = []
        for w in frontiers[side]:
            for step, result in iter_steps(w, system):
                if len(result) > max_len or result in parents[side]:
                    continue
                parents[side][result] = (w, step)
                new_front.append(result)
                if result in parents[1 - side]:
                    return build(result)
                if len(parents[side]) > max_states:
                    return None
        frontiers[side] = new_front
    return None


# -- the generic measure-decreasing driver --------------------------------------


def measure_decreasing_derive(
        ident: Identity, system: RewriteSystem,
        measure: Callable[[Word, Word], int],
        step_rule: Callable[[Word, Word], tuple[Word, list[Step], Word, list[Step]]],
) -> DerivationTrace:
    """Drive a derivation by a strictly decreasing nonnegative measure.

    ``step_rule(u, v)`` returns ``(u1, steps_u, v1, steps_v)`` with the steps
    deriving u = u1 and v = v1 over the system; the measure of (u1, v1) must
    be strictly smaller.  Iterates until the measure is zero, which for the
    instantiations here means the sides coincide; the final trace runs
    u -> ... -> meet -> ... -> v.
    """
    u, v = ident.lhs, ident.rhs
    left: list[Step] = []
    right: list[tuple[Word, Step]] = []  # (word before step, step) on the v side
    m = measure(u, v)
    while m > 0:
        u1, steps_u, v1, steps_v = step_rule(u, v)
        w = u
        for st in steps_u:
            w = apply_step(w, st, system)
        if w != u1:
            raise ReplayError("step_rule returned a non-replaying left derivation")
        w = v
        for st in steps_v:
            right.append((w, st))
            w = apply_step(w, st, system)
        if w != v1:
            raise ReplayError("step_rule returned a non-replaying right derivation")
        m1 = measure(u1, v1)
        if m1 >= m:
            raise StepRuleFailedToDecrease(
                f"measure went {m} -> {m1} on {Identity(u1, v1)!r}")
        left.extend(steps_u)
        u, v, m = u1, v1, m1
    if u != v:
        raise StepRuleFailedToDecrease(
            "measure reached zero on a non-trivial identity")
    inverted = [st.inverted() for _, st in reversed(right)]
    trace = DerivationTrace(ident.lhs, tuple(left + inverted), ident.rhs)
    trace.replay(system)
    return trace


def _swapped(w: Word, pos: int) -> Word:
    return Word(w.letters[:pos] + (w.letters[pos + 1], w.letters[pos])
                + w.letters[pos + 2:])


def _swap_step(u: Word, pos: int, system: RewriteSystem) -> tuple[Word, Step]:
    target = _swapped(u, pos)
    st = find_step(u, target, system)
    if st is None:
        raise DerivationNotFound(
            f"no rule in the system swaps positions {pos},{pos + 1} of {u}")
    return target, st


def derive_block_balanced(ident: Identity) -> DerivationTrace:
    """Derive a block-balanced identity over the closure of
    {sigma_1, sigma_mu, sigma_2} by repeatedly swapping a critical pair;
    every swap strictly shrinks the unstable-pair set."""
    if not is_block_balanced(ident):
        raise NotBlockBalanced(f"{ident!r} is not block-balanced")
    system = sigma_system()

    def measure(u: Word, v: Word) -> int:
        return len(unstable_pairs(Identity(u, v)))

    def step_rule(u: Word, v: Word):
        cp = find_critical_pair(Identity(u, v))
        pos = u.position_of(cp.left)
        target, st = _swap_step(u, pos, system)
        return target, [st], v, []

    return measure_decreasing_derive(ident, system, measure, step_rule)


def derive_P12_block_balanced(ident: Identity) -> DerivationTrace:
    """Derive a block-balanced P_{1,2}-identity over the closure of
    {sigma_1, sigma_2}; P_{1,2} keeps every critical pair away from the
    forbidden {first-of-x, last-of-y} shape."""
    if not is_block_balanced(ident):
        raise PropertyViolated(f"{ident!r} is not block-balanced")
    if not is_p12(ident):
        raise PropertyViolated(f"{ident!r} is not a P_12 identity")
    system = sigma_system(("sigma_1", "sigma_2"))

    def measure(u: Word, v: Word) -> int:
        return len(unstable_pairs(Identity(u, v)))

    def step_rule(u: Word, v: Word):
        cp = find_critical_pair(Identity(u, v))
        pos = u.position_of(cp.left)
        target, st = _swap_step(u, pos, system)
        return target, [st], v, []

    return measure_decreasing_derive(ident, system, measure, step_rule)


# -- typed driver (staged handlers) ----------------------------------------------


@dataclass(frozen=True)
class TypeAssignment:
    """Assigns a type in 1..n to pairs of occurrences of distinct variables.

    Compatibility with the derivation property it serves is enforced
    empirically: the driver checks after every step that the handled pair is
    stable and that stable pairs of type >= the handled type stayed stable.
    """

    n: int
    fn: Callable[[Word, tuple[OccRef, OccRef]], int]

    def of(self, u: Word, pair: tuple[OccRef, OccRef]) -> int:
        t = self.fn(u, pair)
        if not 1 <= t <= self.n:
            raise ValueError(f"type {t} outside 1..{self.n}")
        return t


def chaos2_derive(ident: Identity, system: RewriteSystem,
                  types: TypeAssignment,
                  handler: Callable[[Word, Word, UnstablePair, int], list[Word]],
                  ) -> DerivationTrace:
    """Typed measure-decreasing driver.

    ``handler(u, v, pair, level)`` returns a word sequence u -> ... -> u1
    over the system after which the critical pair is stable.  The per-step
    contract is enforced directly: the handled pair becomes stable and no
    stable pair of type >= level becomes unstable; a violation raises
    StepRuleFailedToDecrease.  Termination follows from the lexicographic
    decrease of the per-type unstable-pair counts.
    """
    u, v = ident.lhs, ident.rhs
    if not is_balanced(ident):
        raise NotBalanced(f"{ident!r} is not balanced")
    left: list[Step] = []
    guard = 0
    bound = (len(u) ** 2 + 2) * (types.n + 1) ** 2 + 64
    while u != v:
        guard += 1
        if guard > bound:
            raise StepRuleFailedToDecrease("typed driver failed to terminate")
        cp = find_critical_pair(Identity(u, v))
        level = types.of(u, (cp.left, cp.right))
        stable_before = {
            frozenset((c, d))
            for c, d in itertools.combinations(u.occ_refs(), 2)
            if c.variable != d.variable
            and types.of(u, (c, d)) >= level
            and (u.position_of(c) < u.position_of(d))
            == (v.position_of(c) < v.position_of(d))}
        words = handler(u, v, cp, level)
        trace = _seq_to_trace([u] + list(words), system)
        u1 = trace.end
        handled_stable = (u1.position_of(cp.left) < u1.position_of(cp.right)) == \
            (v.position_of(cp.left) < v.position_of(cp.right))
        if not handled_stable:
            raise StepRuleFailedToDecrease("handled pair still unstable")
        for pair in stable_before:
            c, d = tuple(pair)
            if (u1.position_of(c) < u1.position_of(d)) != \
                    (v.position_of(c) < v.position_of(d)):
                raise StepRuleFailedToDecrease(
                    f"stable pair {pair} of type >= {level} destabilized")
        left.extend(trace.steps)
        u = u1
    out = DerivationTrace(ident.lhs, tuple(left), ident.rhs)
    out.replay(system)
    return out


# -- compaction ---------------------------------------------------------------


def _L_variables(w: Word) -> list[str]:
    """2-occurring variables with no linear letter between their occurrences."""
    linear = w.linear()
    out = []
    for x in sorted(w.nonlinear()):
        pos = w.positions(x)
        if len(pos) != 2:
            continue
        if any(w.letters[i] in linear for i in range(pos[0] + 1, pos[1])):
            continue
        out.append(x)
    return out


def compact_normal_form(w: Word) -> tuple[Word, DerivationTrace]:
    """Rewrite a 2-limited word to a compact one over the closure of
    {sigma_mu, yxxty = xxyty}.

    Processes the nested-innermost non-adjacent pair first: second
    occurrences whose partner lies left of the pair move out leftward one
    swap at a time, completed nested pairs move out as glued blocks via the
    pair mover, and finally the second occurrence walks left to meet the
    first.
    """
    if not w.is_n_limited(2):
        raise NotTwoLimited(f"{w!r} is not 2-limited")
    system = compact_system()
    steps: list[Step] = []
    cur = w
    guard = 0
    while True:
        guard += 1
        if guard > 4 * len(w) ** 2 + 16:
            raise StepRuleFailedToDecrease("compaction failed to terminate")
        pending = [x for x in _L_variables(cur)
                   if cur.positions(x)[1] - cur.positions(x)[0] > 1]
        if not pending:
            break
        x = min(pending, key=lambda z: (
            cur.positions(z)[1] - cur.positions(z)[0], cur.positions(z)[0]))
        i1, i2 = cur.positions(x)
        move: Optional[tuple[int, str]] = None
        for p in range(i1 + 1, i2):
            z = cur.letters[p]
            zpos = cur.positions(z)
            if len(zpos) == 2 and zpos[1] == p and zpos[0] < i1:
                move = (p, "single")
                break
            if len(zpos) == 2 and zpos[0] == p and p < zpos[1] < i2:
                if zpos[1] != p + 1:
                    raise StepRuleFailedToDecrease(
                        "nested pair not adjacent; processing order broken")
                move = (p, "pair")
                break
        if move is None:
            # only first occurrences (partners beyond i2) remain inside:
            # walk the second x left to adjacency
            for q in range(i2, i1 + 1, -1):
                cur, st = _swap_step(cur, q - 1, system)
                steps.append(st)
            continue
        p, kind = move
        if kind == "single":
            for q in range(p, i1, -1):
                cur, st = _swap_step(cur, q - 1, system)
                steps.append(st)
        else:
            for q in range(p, i1, -1):
                target = Word(cur.letters[:q - 1]
                              + (cur.letters[q], cur.letters[q + 1], cur.letters[q - 1])
                              + cur.letters[q + 2:])
                st = find_step(cur, target, system)
                if st is None:
                    raise DerivationNotFound(
                        f"pair mover inapplicable at {q - 1} in {cur}")
                steps.append(st)
                cur = target
    if not is_compact(cur):
        raise StepRuleFailedToDecrease("compaction finished on a non-compact word")
    trace = DerivationTrace(w, tuple(steps), cur)
    trace.replay(system)
    return cur, trace


# -- the insertion lemma ----------------------------------------------------------


def _axil_words(A: tuple[str, ...], B: tuple[str, ...], C: tuple[str, ...],
                x: str) -> list[Word]:
    """Word sequence from A B x C to A x B x C over {dup, ins_l}^delta."""
    out = [Word(A + B + (x,) + C)]
    if not B:
        out.append(Word(A + (x, x) + C))
        return out
    b, Bp = B[-1], B[:-1]
    out.append(Word(A + B + (x, x) + C))                 # duplicate
    out.append(Word(A + Bp + (x, b, x, x) + C))          # insert left of b
    out.append(Word(A + Bp + (x, b, x) + C))             # collapse the pair
    if Bp:
        sub = _axil_words(A, Bp, (b, x) + C, x)
        assert sub[0] == out[-1]
        out.extend(sub[1:])
        out.append(Word(A + (x,) + Bp + (x, b, x, x) + C))  # duplicate after b
        out.append(Word(A + (x,) + Bp + (b, x, x) + C))     # erase before b
        out.append(Word(A + (x,) + Bp + (b, x) + C))        # collapse
    return out


def axil_transform(A: Word, B: Word, C: Word, x: str,
                   direction: str = "insert") -> DerivationTrace:
    """Trace for A B x C = A x B x C over the closure of
    {xt1xt2x = xt1xxt2x, xt1yxxt2y = xt1xyxxt2y}.

    Requires x in con(A), x in con(C) and con(B) inside con(C); the insert
    direction produces A x B x C, erase runs the same trace backwards.
    """
    if direction not in ("insert", "erase"):
        raise ValueError("direction must be 'insert' or 'erase'")
    if x not in A.content():
        raise PreconditionViolated(f"x = {x!r} does not occur in A = {A}")
    if x not in C.content():
        raise PreconditionViolated(f"x = {x!r} does not occur in C = {C}")
    if not B.content() <= C.content():
        raise PreconditionViolated(
            f"con(B) = {sorted(B.content())} not within con(C) = {sorted(C.content())}")
    system = axil_system()
    words = _axil_words(A.letters, B.letters, C.letters, x)
    trace = _seq_to_trace(words, system)
    if direction == "erase":
        trace = invert_trace(trace, system)
    return trace


# -- the J_3 pipeline -----------------------------------------------------------


def _first_positions(w: Word) -> dict[str, int]:
    return {x: w.positions(x)[0] for x in w.content()}


def _first_sequence(w: Word) -> list[str]:
    return sorted(w.content(), key=lambda x: w.positions(x)[0])


class _Stall(Exception):
    """Structured J_3 step inapplicable; triggers the BFS fallback."""


def _erase_words(u: Word, p: int) -> list[Word]:
    """Word sequence erasing the occurrence at position p via the insertion
    lemma (or its mirror), or raise _Stall."""
    z = u.letters[p]
    pos = u.positions(z)
    if pos[0] == p or pos[-1] == p:
        raise _Stall(f"cannot erase a first/last occurrence at {p}")
    for q in pos:
        if q <= p:
            continue
        A, B, C = u.letters[:p], u.letters[p + 1:q], u.letters[q + 1:]
        if z in C and set(B) <= set(C):
            return list(reversed(_axil_words(A, B, C, z)))
    ru = u.reverse()
    rp = len(u) - 1 - p
    rpos = ru.positions(z)
    for q in rpos:
        if q <= rp:
            continue
        A, B, C = ru.letters[:rp], ru.letters[rp + 1:q], ru.letters[q + 1:]
        if z in C and set(B) <= set(C):
            return [x.reverse() for x in reversed(_axil_words(A, B, C, z))]
    raise _Stall(f"no insertion-lemma split erases position {p} of {u}")


def _insert_words(u: Word, at: int, z: str) -> list[Word]:
    """Word sequence inserting an occurrence of z at position ``at``."""
    pos = u.positions(z)
    for q in pos:
        if q < at:
            continue
        A, B, C = u.letters[:at], u.letters[at:q], u.letters[q + 1:]
        if z in A and z in C and set(B) <= set(C):
            return _axil_words(A, B, C, z)
    ru = u.reverse()
    rat = len(u) - at
    for q in ru.positions(z):
        if q < rat:
            continue
        A, B, C = ru.letters[:rat], ru.letters[rat:q], ru.letters[q + 1:]
        if z in A and z in C and set(B) <= set(C):
            return [x.reverse() for x in _axil_words(A, B, C, z)]
    raise _Stall(f"no insertion-lemma split inserts {z!r} at {at} in {u}")


def _fix_first_inversion(u: Word, v: Word) -> Optional[list[Word]]:
    """One step of the first-occurrence normalization; None when the first
    occurrence orders already agree."""
    fu = _first_sequence(u)
    fv_pos = _first_positions(v)
    pick = None
    for a, b in zip(fu, fu[1:]):
        if fv_pos[b] < fv_pos[a]:
            pick = (a, b)
            break
    if pick is None:
        return None
    x, y = pick
    if u.occ(x) < 3 or u.occ(y) < 3:
        raise _Stall(f"inverted first pair {x},{y} with occurrences < 3")
    words = [u]
    # erase the gap between the first occurrences, rightmost first
    while True:
        i1, i2 = u.positions(x)[0], u.positions(y)[0]
        if i2 == i1 + 1:
            break
        if i2 < i1:
            raise _Stall("first occurrences crossed during normalization")
        seq = _erase_words(u, i2 - 1)
        words.extend(seq[1:])
        u = words[-1]
    i1 = u.positions(x)[0]
    seq = _insert_words(u, i1 + 2, x)     # x right after the first y
    words.extend(seq[1:])
    u = words[-1]
    seq = _insert_words(u, i1 + 3, y)     # y right after the new x
    words.extend(seq[1:])
    u = words[-1]
    i1 = u.positions(x)[0]
    block = u.letters[i1:i1 + 4]
    if block != (x, y, x, y):
        raise _Stall(f"expected an xyxy block, found {block}")
    words.append(Word(u.letters[:i1] + (y, x, y, x) + u.letters[i1 + 4:]))
    return words


def _separator_positions(w: Word) -> list[int]:
    return [i for i in range(len(w)) if w.is_first(i) or w.is_last(i)]


def _separator_signature(w: Word) -> list[tuple[str, bool, bool]]:
    return [(w.letters[i], w.is_first(i), w.is_last(i))
            for i in _separator_positions(w)]


def _gaps(w: Word) -> list[tuple[int, int]]:
    seps = _separator_positions(w)
    out = []
    for a, b in zip(seps, seps[1:]):
        out.append((a + 1, b))
    return out


def _align_gap_counts(w: Word, gap_index: int, want: Counter) -> list[Word]:
    """Raise per-variable counts of a 12-block to the wanted counter."""
    words = [w]
    for z in sorted(want):
        while True:
            s, e = _gaps(w)[gap_index]
            have = Counter(w.letters[s:e])
            if have[z] >= want[z]:
                break
            if have[z] == 0:
                seq = _insert_words(w, s, z)
                words.extend(seq[1:])
            else:
                q = next(i for i in range(s, e) if w.letters[i] == z)
                words.append(Word(w.letters[:q + 1] + (z,) + w.letters[q + 1:]))
            w = words[-1]
    return words


def _permute_gap(w: Word, gap_index: int, target: tuple[str, ...]) -> list[Word]:
    words = [w]
    s, e = _gaps(w)[gap_index]
    letters = list(w.letters[s:e])
    if Counter(letters) != Counter(target):
        raise _Stall("gap contents not aligned before permutation")
    for i in range(len(target)):
        if letters[i] == target[i]:
            continue
        j = next(k for k in range(i + 1, len(letters))
                 if letters[k] == target[i])
        while j > i:
            letters[j - 1], letters[j] = letters[j], letters[j - 1]
            words.append(Word(w.letters[:s] + tuple(letters) + w.letters[e:]))
            j -= 1
        w = words[-1]
    return words


def derive_J3(ident: Identity, bfs_fallback: bool = True) -> DerivationTrace:
    """Derive an identity of J_3 over the closure of the J_3 basis.

    Phase 1 normalizes the first-occurrence order of the left side against
    the right (and, on reversed words, the last-occurrence order): the gap
    between an inverted adjacent pair of first occurrences holds only middle
    occurrences, which are erased by the insertion lemma; fresh x and y
    occurrences complete an xyxy block that a Sigma identity swaps.  Phase 2
    raises per-12-block variable counts on both sides to their maximum
    (insertion lemma plus duplication) and sorts each left 12-block into the
    right one by Delta swaps of adjacent middle occurrences.  Any stall on a
    small instance falls back to the bounded bidirectional search.

    Every intermediate word stays in the J_3 class of the start, which is
    asserted during assembly.
    """
    u0, v0 = ident.lhs, ident.rhs
    from .words import simon_equiv

    if not simon_equiv(u0, v0, 3):
        raise NotInJ3(f"{ident!r} sides differ on scattered subwords of length <= 3")
    system = j3_system()
    useq: list[Word] = [u0]
    vseq: list[Word] = [v0]

    def fallback(u: Word, v: Word) -> list[Word]:
        if not bfs_fallback or len(u) + len(v) > 26:
            raise DerivationNotFound(
                f"structured J_3 pipeline stalled on {Identity(u, v)!r}")
        tr = derivable(Identity(u, v), system,
                       max_len=max(len(u), len(v)) + 4, max_depth=8)
        if tr is None:
            raise DerivationNotFound(
                f"fallback search failed on {Identity(u, v)!r}")
        return tr.words(system)

    try:
        # phase 1: first-occurrence order
        guard = 0
        while True:
            guard += 1
            if guard > len(u0.content()) ** 2 + 4:
                raise _Stall("first-order normalization failed to converge")
            seq = _fix_first_inversion(useq[-1], vseq[-1])
            if seq is None:
                break
            useq.extend(seq[1:])
        # phase 1 dual: last-occurrence order, via reversal
        guard = 0
        while True:
            guard += 1
            if guard > len(u0.content()) ** 2 + 4:
                raise _Stall("last-order normalization failed to converge")
            seq = _fix_first_inversion(useq[-1].reverse(), vseq[-1].reverse())
            if seq is None:
                break
            useq.extend(w.reverse() for w in seq[1:])
        u, v = useq[-1], vseq[-1]
        if _separator_signature(u) != _separator_signature(v):
            raise _Stall("separator sequences disagree after normalization")
        # phase 2: align 12-blocks
        for g in range(len(_gaps(u))):
            su, eu = _gaps(u)[g]
            sv, ev = _gaps(v)[g]
            want = Counter(u.letters[su:eu]) | Counter(v.letters[sv:ev])
            useq.extend(_align_gap_counts(u, g, want)[1:])
            u = useq[-1]
            vseq.extend(_align_gap_counts(v, g, want)[1:])
            v = vseq[-1]
            sv, ev = _gaps(v)[g]
            useq.extend(_permute_gap(u, g, v.letters[sv:ev])[1:])
            u = useq[-1]
        if u != v:
            raise _Stall("sides differ after 12-block alignment")
    except _Stall:
        useq.extend(fallback(useq[-1], vseq[-1])[1:])
        if useq[-1] != vseq[-1]:
            raise DerivationNotFound("fallback did not close the derivation")

    key = subword_key(u0, 3)
    full = useq + [w for w in reversed(vseq[:-1])]
    for w in full:
        if subword_key(w, 3) != key:
            raise StepRuleFailedToDecrease(
                f"intermediate {w} left the J_3 class of {u0}")
    trace = _seq_to_trace(full, system)
    trace.replay(system)
    return trace
