import random

import pytest
from hypothesis import given, strategies as st

from asrfix.core import EvalCorpus, HypothesisSet, Transcript, UtteranceRecord
from asrfix.metrics.wer import EditCounts, corpus_wer, edit_counts, macro_wer, partition_noerr
from oracles import naive_edit_distance


def T(s):
    return s.split()


def test_identity():
    c = edit_counts(T("a b c"), T("a b c"))
    assert c == EditCounts(0, 0, 0, 3) and c.wer == 0


def test_substitution():
    c = edit_counts(T("a b c"), T("a x c"))
    assert (c.substitutions, c.insertions, c.deletions) == (1, 0, 0)
    assert c.wer == pytest.approx(1 / 3)


def test_full_deletion():
    c = edit_counts(["a"], [])
    assert c.deletions == 1 and c.wer == 1.0


def test_empty_both():
    assert edit_counts([], []).total == 0
    assert edit_counts([], ["x", "y"]).insertions == 2


def test_tie_break_prefers_substitution():
    # a->b could be one sub, or one del + one ins; sub is both minimal and preferred
    c = edit_counts(["a"], ["b"])
    assert (c.substitutions, c.insertions, c.deletions) == (1, 0, 0)


def test_corpus_wer():
    assert corpus_wer([(T("a b c"), T("a b c"))] * 3) == 0.0
    val = corpus_wer([(T("a b c"), T("a x c")), (T("d e f"), T("d e f"))])
    assert round(val, 2) == 16.67
    with pytest.raises(ValueError):
        corpus_wer([([], [])])


def test_macro_wer():
    pairs = [(T("a b"), T("a x")), (T("a b c d"), T("a b c d"))]
    assert macro_wer(pairs) == pytest.approx(25.0)
    assert corpus_wer(pairs) == pytest.approx(100 / 6)


def test_partition(sample_corpus):
    part = partition_noerr(sample_corpus)
    assert part.no_err.isdisjoint(part.err)
    assert part.no_err | part.err == {r.id for r in sample_corpus}
    pairs = [(r.reference.tokens, r.hypotheses.top1.tokens) for r in sample_corpus if r.id in part.no_err]
    assert corpus_wer(pairs) == 0.0


def test_partition_simple():
    def rec(rid, ref, top1):
        return UtteranceRecord(rid, Transcript.from_raw(ref), HypothesisSet.from_raw([top1]), "test")

    corpus = EvalCorpus((rec("ok", "a b c d", "A B, c d."), rec("bad", "a b c d", "a b c")))
    part = partition_noerr(corpus)
    assert part.no_err == {"ok"} and part.err == {"bad"}


tok = st.lists(st.sampled_from("abcde"), max_size=8)


@given(tok, tok)
def test_matches_naive_oracle(a, b):
    c = edit_counts(a, b)
    assert c.total == naive_edit_distance(a, b)
    assert c.ref_len == len(a)
    # decomposition is consistent with the lengths
    assert len(a) - c.deletions + c.insertions == len(b)


@given(tok, tok)
def test_symmetry(a, b):
    ab, ba = edit_counts(a, b), edit_counts(b, a)
    assert ab.total == ba.total


@given(tok, tok, tok)
def test_triangle(a, b, c):
    d = lambda x, y: edit_counts(x, y).total  # noqa: E731
    assert d(a, c) <= d(a, b) + d(b, c)


def test_seeded_oracle_sweep():
    rng = random.Random(1)
    for _ in range(300):
        a = [rng.randrange(5) for _ in range(rng.randint(0, 8))]
        b = [rng.randrange(5) for _ in range(rng.randint(0, 8))]
        assert edit_counts(a, b).total == naive_edit_distance(a, b)
