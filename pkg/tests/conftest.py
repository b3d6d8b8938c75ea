"""Shared generators and fixtures for the test suite."""

from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from monoidbasis.words import Word
from monoidbasis.identities import Identity
from monoidbasis.monoids import FiniteMonoid, eval_word_batch, satisfies


def random_word(rng: random.Random, alphabet, min_len=1, max_len=8) -> Word:
    n = rng.randint(min_len, max_len)
    return Word(tuple(rng.choice(alphabet) for _ in range(n)))


def random_word_with_linear(rng: random.Random, max_block_vars=3,
                            max_len=9) -> Word:
    """Word mixing non-linear block variables with fresh linear letters."""
    blockvars = ["x", "y", "z"][:rng.randint(1, max_block_vars)]
    letters: list[str] = []
    tcount = 0
    while len(letters) < max_len:
        if letters and rng.random() < 0.25 and tcount < 3:
            tcount += 1
            letters.append(f"t{tcount}")
        else:
            letters.append(rng.choice(blockvars))
        if rng.random() < 0.18:
            break
    return Word(tuple(letters))


def permute_blocks(rng: random.Random, w: Word) -> Word:
    """A block-balanced partner: permute letters inside each block."""
    from monoidbasis.words import blocks

    letters = list(w.letters)
    for s, e in blocks(w).block_spans():
        seg = letters[s:e]
        rng.shuffle(seg)
        letters[s:e] = seg
    return Word(tuple(letters))


def random_block_balanced(rng: random.Random, max_len=9) -> Identity:
    u = random_word_with_linear(rng, max_len=max_len)
    return Identity(u, permute_blocks(rng, u))


def assert_semantic_soundness(trace, system, monoids, rng_seed=0,
                              samples=1000) -> None:
    """Every consecutive word pair of the trace evaluates equally in every
    monoid under `samples` random assignments per step."""
    words = trace.words(system)
    rng = np.random.default_rng(rng_seed)
    for w1, w2 in zip(words, words[1:]):
        variables = sorted(w1.content() | w2.content())
        for M in monoids:
            asg = {a: rng.integers(0, M.size, size=samples) for a in variables}
            left = eval_word_batch(M, w1, asg)
            right = eval_word_batch(M, w2, asg)
            assert np.array_equal(left, right), (
                f"{M.name} distinguishes {w1} and {w2}")


def monoids_satisfying(system, candidates) -> list[FiniteMonoid]:
    """Candidates that satisfy every base identity of the system."""
    out = []
    for M in candidates:
        if all(satisfies(M, ident) for ident in system.base):
            out.append(M)
    return out


@pytest.fixture(scope="session")
def a01():
    from monoidbasis.monoids import build_A01

    return build_A01()


@pytest.fixture(scope="session")
def s2():
    from monoidbasis.monoids import build_reflexive_relations

    return build_reflexive_relations(2)


@pytest.fixture(scope="session")
def s3():
    from monoidbasis.monoids import build_reflexive_relations

    return build_reflexive_relations(3)
