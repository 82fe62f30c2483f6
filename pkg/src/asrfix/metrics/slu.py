"""Task-oriented metrics: intent accuracy and value-level slot micro-F1."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from ..textnorm import normalize_text

logger = logging.getLogger(__name__)

__all__ = [
    "SluAnnotation",
    "SlotCounts",
    "SluTagger",
    "SluResult",
    "intent_accuracy",
    "slot_counts",
    "slot_micro_f1",
    "evaluate_slu",
    "MockTagger",
]


@dataclass(frozen=True)
class SluAnnotation:
    intent: str
    slots: tuple[tuple[str, str], ...] = ()

    @classmethod
    def create(cls, intent: str, slots: Iterable[tuple[str, str]] = ()) -> "SluAnnotation":
        """Build an annotation, normalizing slot values; empty values are dropped."""
        pairs = []
        for slot_type, value in slots:
            value = normalize_text(value)
            if value:
                pairs.append((slot_type, value))
        return cls(intent, tuple(sorted(pairs)))

    @property
    def multiset(self) -> Counter:
        return Counter(self.slots)


@dataclass(frozen=True)
class SlotCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other):
        return SlotCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


class SluTagger(Protocol):
    name: str

    def tag(self, text: str) -> SluAnnotation: ...


def intent_accuracy(gold: Sequence[str], pred: Sequence[str]) -> float:
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted intents")
    if not gold:
        raise ValueError("intent accuracy undefined for zero utterances")
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


def slot_counts(gold: SluAnnotation, pred: SluAnnotation) -> SlotCounts:
    g, p = gold.multiset, pred.multiset
    tp = sum((g & p).values())
    return SlotCounts(tp=tp, fp=sum((p - g).values()), fn=sum((g - p).values()))


def slot_micro_f1(per_utt: Iterable[SlotCounts]) -> float:
    """Pooled slot F1 in percent. No slots anywhere counts as perfect."""
    total = SlotCounts()
    n = 0
    for c in per_utt:
        total = total + c
        n += 1
    if n == 0:
        raise ValueError("slot micro-F1 undefined for zero utterances")
    if total.tp == 0:
        return 100.0 if total.fp == 0 and total.fn == 0 else 0.0
    precision = total.tp / (total.tp + total.fp)
    recall = total.tp / (total.tp + total.fn)
    return 200.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class SluRow:
    id: str
    gold: SluAnnotation | None
    pred: SluAnnotation | None
    error: str | None = None

    @property
    def intent_match(self) -> bool | None:
        if self.error:
            return None
        return self.gold.intent == self.pred.intent

    @property
    def counts(self) -> SlotCounts | None:
        if self.error:
            return None
        return slot_counts(self.gold, self.pred)


@dataclass(frozen=True)
class SluResult:
    intent_acc: float | None
    slot_f1: float | None
    rows: tuple[SluRow, ...] = field(default_factory=tuple)

    @property
    def excluded(self) -> int:
        return sum(1 for r in self.rows if r.error)


def evaluate_slu(corpus, finals, tagger: SluTagger) -> SluResult:
    """Tag reference (pseudo-gold) and final transcripts, then reduce.

    ``finals`` maps record id to a transcript (anything with ``.raw``) or raw
    string. Records whose tagging fails are excluded and counted.
    """
    rows = []
    for rec in corpus:
        final = finals[rec.id]
        final_raw = getattr(final, "raw", final)
        try:
            gold = tagger.tag(rec.reference.raw)
            pred = tagger.tag(final_raw)
        except Exception as e:  # tagger is an external service
            logger.warning("tagger failed on %s: %s", rec.id, e)
            rows.append(SluRow(rec.id, None, None, error=str(e) or type(e).__name__))
            continue
        rows.append(SluRow(rec.id, gold, pred))
    ok = [r for r in rows if not r.error]
    if not ok:
        return SluResult(None, None, tuple(rows))
    acc = intent_accuracy([r.gold.intent for r in ok], [r.pred.intent for r in ok])
    f1 = slot_micro_f1(r.counts for r in ok)
    return SluResult(acc, f1, tuple(rows))


_WEEKDAYS = "monday|tuesday|wednesday|thursday|friday|saturday|sunday"
_MONTHS = ("january|february|march|april|may|june|july|august|september|october"
           "|november|december")
_NUMBER_WORDS = ("zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve"
                 "|twenty|thirty|forty|fifty|hundred")


class MockTagger:
    """Keyword/regex tagger for offline tests. Not a trained model.

    Intent: first entry of ``INTENTS`` with a keyword present as a word.
    Slots: dates (weekdays, months, relative days), times, numbers, person
    names after a communication verb, and places after "in"/"to".
    """

    name = "mock"

    INTENTS = (
        ("alarm_set", ("alarm", "wake")),
        ("weather_query", ("weather", "rain", "sunny", "temperature")),
        ("calendar_set", ("remind", "reminder", "meeting", "appointment", "schedule")),
        ("play_music", ("play", "song", "music")),
        ("call", ("call", "phone", "text", "message")),
        ("transport_query", ("bus", "train", "taxi", "ride", "drive")),
        ("iot_lights", ("light", "lights", "lamp")),
        ("cooking_recipe", ("cook", "recipe", "bake", "dinner", "lunch")),
        ("qa_factoid", ("what", "who", "where", "when", "how")),
    )
    DEFAULT_INTENT = "general_quirky"

    _SLOT_PATTERNS = (
        ("date", re.compile(rf"\b(?:today|tomorrow|tonight|yesterday|{_WEEKDAYS}|{_MONTHS}(?: \d+)?)\b")),
        ("time", re.compile(r"\b(?:\d+ ?(?:am|pm)|noon|midnight|\d+ o'clock)\b")),
        ("number", re.compile(rf"\b(?:\d+|{_NUMBER_WORDS})\b")),
        ("person", re.compile(r"\b(?:call|text|message|phone|email) ([a-z]+)\b")),
        ("place", re.compile(r"\b(?:in|to) ((?:the )?[a-z]+)\b")),
    )
    _PERSON_STOP = frozenset({"me", "the", "my", "him", "her", "them", "a"})
    _PLACE_STOP = frozenset({"be", "go", "do", "get", "see", "the", "a", "me", "make", "have"})

    def tag(self, text: str) -> SluAnnotation:
        norm = normalize_text(text)
        words = set(norm.split())
        intent = self.DEFAULT_INTENT
        for label, keys in self.INTENTS:
            if words.intersection(keys):
                intent = label
                break
        slots = []
        for slot_type, pattern in self._SLOT_PATTERNS:
            for match in pattern.finditer(norm):
                value = match.group(match.lastindex or 0)
                if slot_type == "person" and value in self._PERSON_STOP:
                    continue
                if slot_type == "place" and value.split()[-1] in self._PLACE_STOP:
                    continue
                slots.append((slot_type, value))
        return SluAnnotation.create(intent, slots)
