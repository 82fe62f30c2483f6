"""Word error rate via token edit distance, and the NoErr/Err partition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "EditCounts",
    "Partition",
    "edit_counts",
    "edit_distance",
    "corpus_wer",
    "macro_wer",
    "partition_noerr",
]


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    ref_len: int = 0

    @property
    def total(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            raise ZeroDivisionError("WER undefined for an empty reference")
        return self.total / self.ref_len

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.ref_len + other.ref_len,
        )


@dataclass(frozen=True)
class Partition:
    no_err: frozenset
    err: frozenset

    def of(self, rid: str) -> str:
        return "noerr" if rid in self.no_err else "err"


def edit_counts(ref: Sequence, hyp: Sequence) -> EditCounts:
    """Minimal S+I+D alignment; backtrace prefers substitution, then deletion."""
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ri == hyp[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    s = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            if d[i][j] == d[i - 1][j - 1] + cost:
                s += cost
                i -= 1
                j -= 1
                continue
        if i > 0 and d[i][j] == d[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(s, ins, dels, n)


def edit_distance(ref: Sequence, hyp: Sequence) -> int:
    return edit_counts(ref, hyp).total


def corpus_wer(pairs: Iterable[tuple[Sequence, Sequence]]) -> float:
    """Pooled WER in percent: sum of edits over sum of reference lengths."""
    total = EditCounts()
    for ref, hyp in pairs:
        total = total + edit_counts(ref, hyp)
    if total.ref_len == 0:
        raise ValueError("corpus WER undefined: all references are empty")
    return 100.0 * total.total / total.ref_len


def macro_wer(pairs: Iterable[tuple[Sequence, Sequence]]) -> float:
    """Mean of per-utterance WER in percent; empty references are skipped."""
    rates = [edit_counts(r, h).wer for r, h in pairs if len(r) > 0]
    if not rates:
        raise ValueError("macro WER undefined: all references are empty")
    return 100.0 * sum(rates) / len(rates)


def partition_noerr(corpus) -> Partition:
    no_err, err = set(), set()
    for rec in corpus:
        if edit_distance(rec.reference.tokens, rec.hypotheses.top1.tokens) == 0:
            no_err.add(rec.id)
        else:
            err.add(rec.id)
    return Partition(frozenset(no_err), frozenset(err))
