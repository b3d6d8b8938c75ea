import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoidbasis.words import (
    EMPTY,
    NamedVariableLinear,
    W,
    Word,
    blocks,
    blocks12,
    delete,
    format_word,
    is_compact,
    is_x_compact,
    is_xy_compact,
    parse_word,
    scattered_subwords,
    simon_equiv,
)

words_st = st.builds(
    Word, st.lists(st.sampled_from(["a", "b", "c", "t1", "t2"]),
                   max_size=8).map(tuple))


# -- parsing ------------------------------------------------------------------


def test_parse_spaced_and_compact_agree():
    assert parse_word("x t1 x y t2 y") == parse_word("xt1xyt2y")
    assert parse_word("") == EMPTY


def test_parse_powers():
    assert parse_word("(xy)^3") == W("xyxyxy")
    assert parse_word("a^2ta") == W("aata")
    assert parse_word("x^2 y^3") == W("xxyyy")


def test_parse_compact_powers_flag():
    assert parse_word("a2ta", compact_powers=True) == W("aata")
    # without the flag, digits belong to the variable name
    assert parse_word("a2ta").letters == ("a2", "t", "a")


@given(words_st)
def test_print_parse_round_trip(w):
    assert parse_word(format_word(w, empty="")) == w


# -- content bookkeeping ---------------------------------------------------------


@given(words_st)
def test_content_partitions(w):
    assert w.content() == w.linear() | w.nonlinear()
    assert not (w.linear() & w.nonlinear())
    for x in w.content():
        assert w.occ(x) == sum(1 for a in w.letters if a == x)


# -- deletion ------------------------------------------------------------------


def test_delete_paper_example():
    assert delete(W("x t1 x y t2 y"), {"x", "y", "t2"}) == W("x x y t2 y")


def test_delete_trivial_cases():
    u = W("xyxy")
    assert delete(u, u.content()) == u
    assert delete(u, {"x"}) == W("xx")
    assert delete(u, set()) == EMPTY


@given(words_st, st.frozensets(st.sampled_from(["a", "b", "c", "t1"])))
def test_delete_idempotent(w, keep):
    once = delete(w, keep)
    assert delete(once, keep) == once


# -- blocks ---------------------------------------------------------------------


def test_blocks_example():
    dec = blocks(W("x x y t1 y y y x t2 x"))
    assert [str(b) for b in dec.blocks] == ["xxy", "yyyx", "x"]
    assert list(dec.separators) == ["t1", "t2"]


def test_blocks_degenerate():
    assert blocks(W("t1 t2")).blocks == ()
    # y occurs once in xyx, hence is a linear letter separating two blocks
    assert [str(b) for b in blocks(W("xyx")).blocks] == ["x", "x"]
    assert [str(b) for b in blocks(W("xyxyx")).blocks] == ["xyxyx"]


@given(words_st)
def test_blocks_round_trip(w):
    dec = blocks(w)
    assert dec.rejoin() == w
    for b in dec.blocks:
        assert len(b) > 0
        assert not (b.content() & w.linear())


def test_blocks12_example():
    u = W("xyxxyx")
    dec = blocks12(u)
    # separators: first x, first y, last y, last x; middle xx is the 12-block
    assert [str(b) for b in dec.blocks] == ["xx"]
    assert dec.block_spans() == ((2, 4),)
    assert list(dec.separators) == ["x", "y", "y", "x"]


def test_blocks12_degenerate():
    assert blocks12(W("xy")).blocks == ()
    dec = blocks12(W("xxx"))
    assert [str(b) for b in dec.blocks] == ["x"]   # the middle occurrence


@given(words_st)
def test_blocks12_round_trip_and_middles(w):
    dec = blocks12(w)
    assert dec.rejoin() == w
    for s, e in dec.block_spans():
        for i in range(s, e):
            assert not w.is_first(i) and not w.is_last(i)
            assert w.occ(w.letters[i]) >= 3


# -- compactness ------------------------------------------------------------------


def test_compact_paper_examples():
    assert is_x_compact(W("xxytyxy"), "x") is True
    assert is_x_compact(W("xyyx"), "x") is False
    assert is_xy_compact(W("pxxyztpyxyz"), "x", "y") is True
    assert is_xy_compact(W("xyzyxz"), "x", "y") is False
    assert is_compact(W("x x y t1 y y y x t2 x")) is True
    assert is_compact(W("xyyx")) is False


def test_compact_dispatch():
    u = W("xxytyxy")
    assert is_compact(u, "x") is True
    assert is_compact(u, ("x", "y")) is True   # both blocks are pure x,y
    assert is_compact(W("x z y y t1 x y z"), ("x", "y")) is False


def test_compact_linear_variable_errors():
    with pytest.raises(NamedVariableLinear):
        is_x_compact(W("xty"), "t")
    with pytest.raises(NamedVariableLinear):
        is_xy_compact(W("xxy"), "x", "y")


@given(words_st)
def test_compact_implies_per_variable(w):
    if is_compact(w):
        for x in w.nonlinear():
            assert is_x_compact(w, x)


# -- scattered subwords -------------------------------------------------------------


def brute_subwords(w: Word, m: int) -> set:
    out = set()
    for l in range(1, m + 1):
        for idxs in itertools.combinations(range(len(w)), l):
            out.add(tuple(w.letters[i] for i in idxs))
    return out


def test_subwords_examples():
    assert {str(s) for s in scattered_subwords(W("xy"), 2)} == {"x", "y", "xy"}
    assert scattered_subwords(EMPTY, 3) == frozenset()
    subs = scattered_subwords(W("xyx"), 2)
    assert len(subs) == 5
    assert {str(s) for s in subs} == {"x", "y", "xy", "yx", "xx"}


@given(words_st, st.integers(min_value=1, max_value=4))
@settings(max_examples=150)
def test_subwords_match_brute_force(w, m):
    assert {s.letters for s in scattered_subwords(w, m)} == brute_subwords(w, m)


def test_simon_equiv_paper_examples():
    assert simon_equiv(W("(xy)^3"), W("(yx)^3"), 3) is True
    assert simon_equiv(W("xy"), W("yx"), 2) is False
    assert simon_equiv(W("xyxytxty"), W("yxyxtxty"), 3) is True
    assert simon_equiv(W("xtytxyxy"), W("xtytyxyx"), 3) is True


@given(words_st, words_st, st.integers(min_value=1, max_value=4))
@settings(max_examples=150)
def test_simon_equiv_monotone(u, v, m):
    if simon_equiv(u, v, m):
        for k in range(1, m):
            assert simon_equiv(u, v, k)


@given(words_st, words_st, st.integers(min_value=1, max_value=4))
@settings(max_examples=150)
def test_simon_equiv_matches_brute_force(u, v, m):
    assert simon_equiv(u, v, m) == (brute_subwords(u, m) == brute_subwords(v, m))


# -- occurrence references ------------------------------------------------------------


def test_occ_refs():
    u = W("xyxy")
    refs = u.occ_refs()
    assert [repr(r) for r in refs] == ["x_1", "y_1", "x_2", "y_2"]
    assert u.position_of(refs[2]) == 2
    assert u.occ_at(3) == refs[3]
