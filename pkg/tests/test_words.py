import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfsim import words as wd
from selfsim.errors import BudgetExceededError

short_words = st.lists(st.integers(min_value=1, max_value=3), max_size=6).map(tuple)


def test_empty_word_prefixes_everything():
    assert wd.is_prefix((), (1, 2, 1))
    assert wd.is_prefix((), ())


def test_literal_prefix():
    assert wd.is_prefix((1, 2), (1, 2, 1))
    assert not wd.is_prefix((2,), (1, 2, 1))


def test_incomparable_basic():
    assert wd.incomparable((1,), (2,))
    assert not wd.incomparable((1,), (1, 2))


def test_enumerate_level_base_cases():
    assert wd.enumerate_level(2, 0) == [()]
    assert wd.enumerate_level(2, 2) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    lvl = wd.enumerate_level(3, 2)
    assert len(lvl) == 9
    assert lvl[0] == (1, 1) and lvl[-1] == (3, 3)
    assert len(set(lvl)) == 9


def test_children():
    assert wd.children((), 3) == [(1,), (2,), (3,)]
    assert wd.children((1, 2), 2) == [(1, 2, 1), (1, 2, 2)]
    for c in wd.children((1, 2), 2):
        assert wd.is_prefix((1, 2), c)


def test_budget_guard():
    with pytest.raises(BudgetExceededError):
        wd.enumerate_level(2, 30, budget=1000)


def test_level_equals_concatenated_children():
    for k in (2, 3):
        for n in (0, 1, 2):
            parents = wd.enumerate_level(k, n)
            rebuilt = [c for u in parents for c in wd.children(u, k)]
            assert rebuilt == wd.enumerate_level(k, n + 1)


@given(short_words, short_words)
def test_incomparable_symmetric(u, v):
    assert wd.incomparable(u, v) == wd.incomparable(v, u)


@given(short_words, short_words, short_words)
def test_prefix_partial_order(u, v, w):
    assert wd.is_prefix(u, u)
    if wd.is_prefix(u, v) and wd.is_prefix(v, u):
        assert u == v
    if wd.is_prefix(u, v) and wd.is_prefix(v, w):
        assert wd.is_prefix(u, w)


@given(st.integers(min_value=2, max_value=4), st.integers(min_value=1, max_value=4))
def test_equal_length_distinct_words_incomparable(k, n):
    lvl = wd.enumerate_level(k, n)
    sample = lvl[:: max(1, len(lvl) // 6)]
    for u in sample:
        for v in sample:
            if u != v:
                assert wd.incomparable(u, v)


def test_validate_word():
    assert wd.validate_word((1, 3), 3) == (1, 3)
    with pytest.raises(ValueError):
        wd.validate_word((0,), 3)
    with pytest.raises(ValueError):
        wd.validate_word((4,), 3)
