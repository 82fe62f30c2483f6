"""Semantic fidelity scores: sentence-embedding cosine, greedy token-matching
F1 (BERTScore without IDF or baseline rescaling), and NLI entailment.

Neural models sit behind small provider objects. Offline providers ship here
for tests and smoke runs; HTTP-backed providers live in :mod:`asrfix.providers`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from ..textnorm import normalize

__all__ = [
    "EmbeddingProvider",
    "NliProvider",
    "SemanticScores",
    "ZeroNormError",
    "q_emb_score",
    "bertscore_f1",
    "bertscore_prf",
    "nli_entail_score",
    "HashingEmbeddingProvider",
    "TableEmbeddingProvider",
    "LexicalNliProvider",
    "TableNliProvider",
]


class ZeroNormError(ValueError):
    pass


class EmbeddingProvider(Protocol):
    name: str

    def embed_sentence(self, text: str) -> np.ndarray: ...

    def embed_tokens(self, text: str) -> np.ndarray: ...


class NliProvider(Protocol):
    name: str

    def entail_prob(self, premise: str, hypothesis: str) -> float: ...


@dataclass(frozen=True)
class SemanticScores:
    q_emb: float | None = None
    bert_f1: float | None = None
    menli: float | None = None


def _unit(v, text):
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite embedding for {text!r}")
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ZeroNormError(f"zero-norm embedding for {text!r}")
    return v / norm


def q_emb_score(ref: str, hyp: str, p: EmbeddingProvider) -> float:
    """100 x cosine similarity of sentence embeddings (not clipped)."""
    a = _unit(p.embed_sentence(ref), ref)
    b = _unit(p.embed_sentence(hyp), hyp)
    return 100.0 * float(np.dot(a, b))


def bertscore_prf(ref: str, hyp: str, p: EmbeddingProvider) -> tuple[float, float, float]:
    """Greedy-matching precision, recall and F1 as fractions."""
    r = np.atleast_2d(np.asarray(p.embed_tokens(ref), dtype=np.float64))
    h = np.atleast_2d(np.asarray(p.embed_tokens(hyp), dtype=np.float64))
    if r.shape[0] == 0 or r.size == 0:
        raise ValueError(f"no token embeddings for reference {ref!r}")
    if h.shape[0] == 0 or h.size == 0:
        raise ValueError(f"no token embeddings for hypothesis {hyp!r}")
    sim = _unit(r, ref) @ _unit(h, hyp).T
    recall = float(sim.max(axis=1).mean())
    precision = float(sim.max(axis=0).mean())
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def bertscore_f1(ref: str, hyp: str, p: EmbeddingProvider) -> float:
    return 100.0 * bertscore_prf(ref, hyp, p)[2]


def nli_entail_score(ref: str, hyp: str, p: NliProvider) -> float:
    """Probability that the hypothesis (premise) entails the reference, in percent."""
    prob = float(p.entail_prob(hyp, ref))
    if not (0.0 <= prob <= 1.0) or math.isnan(prob):
        raise ValueError(f"entailment probability out of range: {prob}")
    return 100.0 * prob


class HashingEmbeddingProvider:
    """Deterministic offline embedder from hashed character trigrams.

    Not a semantic model. Token vectors are hashed trigram counts of each
    normalized word; the sentence vector is their sum.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim
        self.name = f"hashing-{dim}"

    def _word(self, word: str) -> np.ndarray:
        v = np.zeros(self.dim)
        padded = f"#{word}#"
        for i in range(max(1, len(padded) - 2)):
            gram = padded[i:i + 3].encode("utf-8")
            digest = hashlib.blake2b(gram, digest_size=8).digest()
            idx = int.from_bytes(digest[:4], "little") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            v[idx] += sign
        if not v.any():
            v[0] = 1.0
        return v

    def embed_tokens(self, text: str) -> np.ndarray:
        words = normalize(text)
        if not words:
            return np.zeros((0, self.dim))
        return np.stack([self._word(w) for w in words])

    def embed_sentence(self, text: str) -> np.ndarray:
        toks = self.embed_tokens(text)
        if toks.shape[0] == 0:
            return np.zeros(self.dim)
        return toks.sum(axis=0)


class TableEmbeddingProvider:
    """Fixed vectors keyed by text; for tests and hand-built fixtures."""

    def __init__(self, sentences=None, tokens=None, name="table"):
        self.sentences = dict(sentences or {})
        self.tokens = dict(tokens or {})
        self.name = name

    def embed_sentence(self, text):
        return np.asarray(self.sentences[text], dtype=np.float64)

    def embed_tokens(self, text):
        return np.asarray(self.tokens[text], dtype=np.float64)


class LexicalNliProvider:
    """Offline stand-in for an NLI classifier.

    Entailment probability is the fraction of hypothesis word tokens (as a
    multiset) found in the premise. Identical texts give 1.0.
    """

    name = "lexical-nli"

    def entail_prob(self, premise: str, hypothesis: str) -> float:
        from collections import Counter

        hyp = Counter(normalize(hypothesis))
        if not hyp:
            return 1.0
        prem = Counter(normalize(premise))
        return sum((hyp & prem).values()) / sum(hyp.values())


class TableNliProvider:
    def __init__(self, table: dict, default: float | None = None, name="table-nli"):
        self.table = dict(table)
        self.default = default
        self.name = name

    def entail_prob(self, premise, hypothesis):
        key = (premise, hypothesis)
        if key in self.table:
            return self.table[key]
        if self.default is None:
            raise KeyError(f"no entailment entry for {key!r}")
        return self.default


def score_pair(ref: str, hyp: str, embedder: EmbeddingProvider | None = None,
               nli: NliProvider | None = None) -> SemanticScores:
    return SemanticScores(
        q_emb=q_emb_score(ref, hyp, embedder) if embedder is not None else None,
        bert_f1=bertscore_f1(ref, hyp, embedder) if embedder is not None else None,
        menli=nli_entail_score(ref, hyp, nli) if nli is not None else None,
    )


def mean(values: Sequence[float]) -> float:
    values = list(values)
    if not values:
        raise ValueError("mean of empty sequence")
    return sum(values) / len(values)
