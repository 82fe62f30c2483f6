import pytest
from hypothesis import given, strategies as st

from asrfix.truncate import (
    TruncationConfig, best_phrase, repeat_count, truncate_repeated_phrase, truncate_to_fixed_point,
)
from oracles import brute_repeat, brute_truncate


def T(s):
    return s.split()


@pytest.mark.parametrize("y,u,expected", [
    ("a b a b a b c", "a b", 3),
    ("a b a", "a", 1),
    ("x", "a", 0),
    ("a a a a", "a a", 2),
    ("a b c", "a b c d", 0),
])
def test_repeat_count(y, u, expected):
    assert repeat_count(T(y), T(u)) == expected
    assert brute_repeat(T(y), T(u)) == expected


def test_repeat_count_empty_phrase():
    with pytest.raises(ValueError):
        repeat_count(["a"], [])


def test_config_validation():
    with pytest.raises(ValueError):
        TruncationConfig(0, 3)
    with pytest.raises(ValueError):
        TruncationConfig(3, 2)


@pytest.mark.parametrize("y,m,M,expected", [
    ("the quick brown fox", 1, 4, "the quick brown fox"),
    ("i want i want i want to go", 1, 3, "i want"),
    ("a a b b", 1, 1, "a"),
    ("", 1, 5, ""),
    # coverage 3*3=9 beats 'kitchen'-free shorter loops
    ("turn off the lights in the kitchen in the kitchen in the kitchen", 1, 5,
     "turn off the lights in the kitchen"),
    # phrase longer than M is invisible
    ("one two three one two three", 1, 2, "one two three one two three"),
    # equal coverage and first index: shorter phrase wins
    ("a a a a", 1, 2, "a"),
])
def test_truncate_examples(y, m, M, expected):
    cfg = TruncationConfig(m, M)
    assert truncate_repeated_phrase(T(y), cfg) == T(expected)
    assert brute_truncate(T(y), m, M) == T(expected)


def test_first_index_is_first_occurrence_anywhere():
    # 'b' first appears at index 1, outside its repeated run at 3..5
    y = T("a b c b b b")
    best = best_phrase(y, TruncationConfig(1, 1))
    assert best.u == ("b",) and best.repeat == 3 and best.first_index == 1
    assert truncate_repeated_phrase(y, TruncationConfig(1, 1)) == T("a b")


seqs = st.lists(st.sampled_from("abc"), max_size=12)


@given(seqs, st.integers(1, 4), st.integers(0, 3))
def test_matches_oracle(y, m, extra):
    M = min(4, m + extra)
    assert truncate_repeated_phrase(y, TruncationConfig(m, M)) == brute_truncate(y, m, M)


@given(seqs)
def test_output_is_prefix(y):
    out = truncate_repeated_phrase(y)
    assert y[:len(out)] == out


@given(seqs)
def test_fixed_point_reached(y):
    cfg = TruncationConfig(1, 3)
    steps = 0
    cur = list(y)
    while True:
        nxt = truncate_repeated_phrase(cur, cfg)
        if nxt == cur:
            break
        cur = nxt
        steps += 1
        assert steps <= len(y)
    assert truncate_to_fixed_point(y, cfg) == cur


@given(st.lists(st.sampled_from("abcdefghijklmnop"), max_size=12, unique=True))
def test_no_repetition_is_noop(y):
    assert truncate_repeated_phrase(y) == y
