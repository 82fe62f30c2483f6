"""scikit-learn compatible wrappers.

The transformers are stateless: ``fit`` only validates input and returns
``self``, so they drop into :class:`sklearn.pipeline.Pipeline` next to
vectorizers and classifiers. Inputs are sequences of strings (or, for the
corrector, utterance records); outputs are normalized strings.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .agent import AgentMode, run_batch
from .core import EvalCorpus, UtteranceRecord
from .metrics.wer import corpus_wer
from .textnorm import NormConfig, normalize
from .truncate import TruncationConfig, truncate_repeated_phrase

__all__ = [
    "check_texts",
    "check_records",
    "TextNormalizer",
    "RepeatedPhraseTruncator",
    "JudgeEditorCorrector",
]


def check_texts(X) -> list[str]:
    """Validate a 1-d collection of strings and return it as a list."""
    if isinstance(X, str):
        raise TypeError("expected a sequence of strings, got a single string")
    if hasattr(X, "ndim") and getattr(X, "ndim") != 1:
        raise ValueError(f"expected 1-d input, got array with ndim={X.ndim}")
    try:
        texts = list(X)
    except TypeError as e:
        raise TypeError(f"expected a sequence of strings, got {type(X).__name__}") from e
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"element {i} is {type(t).__name__}, expected str")
    return texts


def check_records(X) -> list[UtteranceRecord]:
    if isinstance(X, EvalCorpus):
        return list(X.records)
    records = list(X)
    for i, r in enumerate(records):
        if not isinstance(r, UtteranceRecord):
            raise TypeError(f"element {i} is {type(r).__name__}, expected UtteranceRecord")
    return records


class TextNormalizer(BaseEstimator, TransformerMixin):
    def __init__(self, expand_contractions=False, abbreviation_min_len=2):
        self.expand_contractions = expand_contractions
        self.abbreviation_min_len = abbreviation_min_len

    def _cfg(self):
        return NormConfig(self.expand_contractions, self.abbreviation_min_len)

    def fit(self, X, y=None):
        check_texts(X)
        self._cfg()
        return self

    def transform(self, X):
        cfg = self._cfg()
        return [" ".join(normalize(t, cfg)) for t in check_texts(X)]


class RepeatedPhraseTruncator(BaseEstimator, TransformerMixin):
    """Cut each transcript after the first occurrence of its dominant repeated phrase."""

    def __init__(self, m=1, M=5):
        self.m = m
        self.M = M

    def fit(self, X, y=None):
        check_texts(X)
        TruncationConfig(self.m, self.M)
        return self

    def transform(self, X):
        cfg = TruncationConfig(self.m, self.M)
        return [" ".join(truncate_repeated_phrase(t.split(), cfg)) for t in check_texts(X)]


class JudgeEditorCorrector(BaseEstimator, TransformerMixin):
    """Run the correction agent over utterance records.

    ``transform``/``predict`` return the final normalized transcripts;
    ``correct`` returns the full per-record results. ``score`` is the
    negated corpus WER against the record references, so larger is better.
    """

    def __init__(self, provider=None, mode="jea", m=1, M=5, parallelism=1, max_tokens=256):
        self.provider = provider
        self.mode = mode
        self.m = m
        self.M = M
        self.parallelism = parallelism
        self.max_tokens = max_tokens

    def fit(self, X, y=None):
        check_records(X)
        mode = AgentMode.from_name(self.mode)
        if self.provider is None and not mode.passthrough:
            raise ValueError(f"mode {self.mode!r} needs a completion provider")
        return self

    def correct(self, X):
        mode = AgentMode.from_name(self.mode)
        return run_batch(check_records(X), mode, self.provider, TruncationConfig(self.m, self.M),
                         self.parallelism, max_tokens=self.max_tokens)

    def transform(self, X):
        return [r.final.text for r in self.correct(X)]

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y=None):
        records = check_records(X)
        refs = [r.reference.tokens for r in records] if y is None else [tuple(normalize(t)) for t in check_texts(y)]
        hyps = [r.final.tokens for r in self.correct(records)]
        return -corpus_wer(zip(refs, hyps))
