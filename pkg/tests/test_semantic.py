import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asrfix.metrics.semantic import (
    HashingEmbeddingProvider, LexicalNliProvider, TableEmbeddingProvider, TableNliProvider, ZeroNormError,
    bertscore_f1, bertscore_prf, nli_entail_score, q_emb_score,
)

e1, e2 = [1.0, 0.0], [0.0, 1.0]


def test_q_emb_hand_cosine():
    p = TableEmbeddingProvider(sentences={"r": [1, 0], "h": [math.sqrt(2) / 2, math.sqrt(2) / 2]})
    assert round(q_emb_score("r", "h", p), 2) == 70.71


def test_q_emb_self_and_orthogonal():
    p = TableEmbeddingProvider(sentences={"a": [3, 4], "b": [-4, 3]})
    assert q_emb_score("a", "a", p) == pytest.approx(100.0)
    assert q_emb_score("a", "b", p) == pytest.approx(0.0)


def test_q_emb_zero_norm_names_text():
    p = TableEmbeddingProvider(sentences={"a": [1, 0], "silent": [0, 0]})
    with pytest.raises(ZeroNormError, match="silent"):
        q_emb_score("a", "silent", p)


def test_q_emb_unclipped_negative():
    p = TableEmbeddingProvider(sentences={"a": [1, 0], "b": [-1, 0]})
    assert q_emb_score("a", "b", p) == pytest.approx(-100.0)


def test_bertscore_hand_matching():
    p = TableEmbeddingProvider(tokens={"ref": [e1, e2], "hyp": [e1]})
    P, R, F = bertscore_prf("ref", "hyp", p)
    assert (P, R) == (1.0, 0.5)
    assert round(bertscore_f1("ref", "hyp", p), 2) == 66.67


def test_bertscore_orthogonal():
    p = TableEmbeddingProvider(tokens={"ref": [e1], "hyp": [e2]})
    assert bertscore_f1("ref", "hyp", p) == 0.0


def test_bertscore_empty_errors():
    p = HashingEmbeddingProvider()
    with pytest.raises(ValueError):
        bertscore_f1("", "a b", p)


def test_nli_stub():
    table = TableNliProvider({("a cat was sitting", "the cat sat"): 0.91, ("x", "x"): 1.0, ("y", "x"): 0.0})
    # premise is the hypothesis transcript, hypothesis is the reference
    assert nli_entail_score("the cat sat", "a cat was sitting", table) == pytest.approx(91.0)
    assert nli_entail_score("x", "x", table) == 100.0
    assert nli_entail_score("x", "y", table) == 0.0
    with pytest.raises(ValueError):
        nli_entail_score("x", "y", TableNliProvider({}, default=1.5))


def test_lexical_nli():
    p = LexicalNliProvider()
    assert p.entail_prob("the cat sat", "the cat sat") == 1.0
    assert p.entail_prob("the dog sat", "the cat sat") == pytest.approx(2 / 3)


texts = st.lists(st.sampled_from(["the", "cat", "sat", "on", "mat", "dog", "ran"]), min_size=1, max_size=6).map(" ".join)


@settings(max_examples=50)
@given(texts, texts)
def test_properties_with_hashing_provider(a, b):
    p = HashingEmbeddingProvider(dim=64)
    assert q_emb_score(a, b, p) == pytest.approx(q_emb_score(b, a, p))
    assert bertscore_f1(a, a, p) == pytest.approx(100.0, abs=1e-4)
    pa, ra, fa = bertscore_prf(a, b, p)
    pb, rb, fb = bertscore_prf(b, a, p)
    assert pa == pytest.approx(rb) and ra == pytest.approx(pb)
    assert fa == pytest.approx(fb)


def test_hashing_provider_deterministic():
    p = HashingEmbeddingProvider()
    assert np.array_equal(p.embed_tokens("hello world"), HashingEmbeddingProvider().embed_tokens("hello world"))
