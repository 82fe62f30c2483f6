"""Shared domain types and the line-delimited corpus format."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .textnorm import DEFAULT_CONFIG, NormConfig, detokenize, normalize

SPLITS = ("train", "dev", "test")


class CorpusFormatError(ValueError):
    """A corpus file line failed validation."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Transcript:
    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_raw(cls, raw: str, cfg: NormConfig = DEFAULT_CONFIG) -> "Transcript":
        return cls(raw, tuple(normalize(raw, cfg)))

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Transcript":
        tokens = tuple(tokens)
        return cls(detokenize(tokens), tokens)

    @property
    def text(self) -> str:
        """Normalized text (tokens joined by single spaces)."""
        return " ".join(self.tokens)

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class HypothesisSet:
    items: tuple[Transcript, ...]

    @property
    def k(self) -> int:
        return len(self.items)

    @property
    def top1(self) -> Transcript:
        return self.items[0]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @classmethod
    def from_raw(cls, raws: Iterable[str], cfg: NormConfig = DEFAULT_CONFIG) -> "HypothesisSet":
        return cls(tuple(Transcript.from_raw(r, cfg) for r in raws))


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    reference: Transcript
    hypotheses: HypothesisSet
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"record {self.id!r}: split must be one of {SPLITS}, got {self.split!r}")
        if not self.hypotheses.items:
            raise ValueError(f"record {self.id!r}: empty hypothesis set")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "reference": self.reference.raw,
            "hypotheses": [h.raw for h in self.hypotheses],
            "split": self.split,
        }

    @classmethod
    def from_json(cls, obj: dict, cfg: NormConfig = DEFAULT_CONFIG) -> "UtteranceRecord":
        return cls(
            id=obj["id"],
            reference=Transcript.from_raw(obj["reference"], cfg),
            hypotheses=HypothesisSet.from_raw(obj["hypotheses"], cfg),
            split=obj["split"],
        )


@dataclass(frozen=True)
class EvalCorpus:
    records: tuple[UtteranceRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise ValueError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)

    @property
    def size(self) -> int:
        return len(self.records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def subset(self, ids) -> "EvalCorpus":
        ids = set(ids)
        return EvalCorpus(tuple(r for r in self.records if r.id in ids))

    def by_split(self, split: str) -> "EvalCorpus":
        return EvalCorpus(tuple(r for r in self.records if r.split == split))


def _check_record_obj(obj, lineno, path):
    if not isinstance(obj, dict):
        raise CorpusFormatError("record must be a JSON object", lineno, path)
    for key in ("id", "reference", "hypotheses", "split"):
        if key not in obj:
            raise CorpusFormatError(f"missing field {key!r}", lineno, path)
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise CorpusFormatError("field 'id' must be a nonempty string", lineno, path)
    if not isinstance(obj["reference"], str):
        raise CorpusFormatError("field 'reference' must be a string", lineno, path)
    hyps = obj["hypotheses"]
    if not isinstance(hyps, list) or not hyps or not all(isinstance(h, str) for h in hyps):
        raise CorpusFormatError("field 'hypotheses' must be a nonempty list of strings", lineno, path)
    if obj["split"] not in SPLITS:
        raise CorpusFormatError(f"field 'split' must be one of {SPLITS}", lineno, path)


def read_corpus(path, cfg: NormConfig = DEFAULT_CONFIG) -> EvalCorpus:
    """Read a line-delimited corpus file; hypotheses are normalized on load."""
    path = Path(path)
    records = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"malformed JSON ({e.msg})", lineno, path) from e
            _check_record_obj(obj, lineno, path)
            if obj["id"] in seen:
                raise CorpusFormatError(f"duplicate id {obj['id']!r}", lineno, path)
            seen.add(obj["id"])
            records.append(UtteranceRecord.from_json(obj, cfg))
    return EvalCorpus(tuple(records))


def dump_jsonl(objs: Iterable[dict], path) -> None:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            for obj in objs:
                f.write(json.dumps(obj, ensure_ascii=False))
                f.write("\n")
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"failed to write {path}: {e}") from e


def write_corpus(corpus: EvalCorpus | Sequence[UtteranceRecord], path) -> None:
    dump_jsonl((r.to_json() for r in corpus), path)
