"""Repeated phrase truncation for hallucinated repetition loops.

Among contiguous phrases whose length is within ``[m, M]`` and which occur at
least twice back to back, pick the one with the largest coverage
(consecutive repeat count times phrase length), breaking ties by the earliest
first occurrence and then the shorter phrase. The sequence is cut right after
the first occurrence of that phrase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "TruncationConfig",
    "PhraseCandidate",
    "repeat_count",
    "phrase_candidates",
    "best_phrase",
    "truncate_repeated_phrase",
    "truncate_to_fixed_point",
]


@dataclass(frozen=True)
class TruncationConfig:
    m: int = 1
    M: int = 5

    def __post_init__(self):
        if not (1 <= self.m <= self.M):
            raise ValueError(f"need 1 <= m <= M, got m={self.m}, M={self.M}")


@dataclass(frozen=True)
class PhraseCandidate:
    u: tuple
    repeat: int
    first_index: int

    @property
    def coverage(self) -> int:
        return self.repeat * len(self.u)

    def key(self):
        return (self.coverage, -self.first_index, -len(self.u))


def repeat_count(y: Sequence, u: Sequence) -> int:
    """Largest r such that u repeated r times occurs contiguously in y."""
    u = tuple(u)
    if not u:
        raise ValueError("phrase must be nonempty")
    y = tuple(y)
    L = len(u)
    best = 0
    for start in range(len(y) - L + 1):
        r = 0
        p = start
        while y[p:p + L] == u:
            r += 1
            p += L
        best = max(best, r)
    return best


def phrase_candidates(y: Sequence, cfg: TruncationConfig = TruncationConfig()) -> list[PhraseCandidate]:
    """All phrases with length in [m, M] that repeat consecutively at least twice."""
    y = tuple(y)
    n = len(y)
    out = []
    for L in range(cfg.m, min(cfg.M, n // 2) + 1):
        # run[p]: copies of y[p:p+L] laid end to end starting at p
        run = [1] * (n - L + 1)
        for p in range(n - 2 * L, -1, -1):
            if y[p:p + L] == y[p + L:p + 2 * L]:
                run[p] = run[p + L] + 1
        first = {}
        best = {}
        for p in range(n - L + 1):
            u = y[p:p + L]
            if u not in first:
                first[u] = p
            if run[p] > best.get(u, 0):
                best[u] = run[p]
        for u, r in best.items():
            if r >= 2:
                out.append(PhraseCandidate(u, r, first[u]))
    return out


def best_phrase(y: Sequence, cfg: TruncationConfig = TruncationConfig()) -> PhraseCandidate | None:
    cands = phrase_candidates(y, cfg)
    if not cands:
        return None
    return max(cands, key=PhraseCandidate.key)


def truncate_repeated_phrase(y: Sequence, cfg: TruncationConfig = TruncationConfig()) -> list:
    """Cut ``y`` after the first occurrence of its best repeated phrase.

    >>> truncate_repeated_phrase("i want i want i want to go".split(), TruncationConfig(1, 3))
    ['i', 'want']
    """
    y = list(y)
    best = best_phrase(y, cfg)
    if best is None:
        return y
    return y[:best.first_index + len(best.u)]


def truncate_to_fixed_point(y: Sequence, cfg: TruncationConfig = TruncationConfig()) -> list:
    y = list(y)
    while True:
        out = truncate_repeated_phrase(y, cfg)
        if len(out) == len(y):
            return out
        y = out
