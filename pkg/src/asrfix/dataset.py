"""Build n-best correction corpora from raw beam-search dumps."""

from __future__ import annotations

import json
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import SPLITS, CorpusFormatError, EvalCorpus, HypothesisSet, Transcript, UtteranceRecord
from .textnorm import DEFAULT_CONFIG, NormConfig

logger = logging.getLogger(__name__)

__all__ = [
    "RawNBest",
    "BuildConfig",
    "BuildLog",
    "read_nbest_dump",
    "select_topk_unique",
    "build_corpus",
    "split_stats",
    "import_released",
]


@dataclass(frozen=True)
class RawNBest:
    id: str
    reference_raw: str
    candidates: tuple[tuple[str, float], ...]
    split: str

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple((str(t), float(s)) for t, s in self.candidates))
        if self.split not in SPLITS:
            raise ValueError(f"{self.id}: split must be one of {SPLITS}")
        scores = [s for _, s in self.candidates]
        if not all(math.isfinite(s) for s in scores):
            raise ValueError(f"{self.id}: candidate scores must be finite")
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError(f"{self.id}: candidates must be sorted by descending score")


@dataclass(frozen=True)
class BuildConfig:
    k: int = 5
    min_words: int = 4
    max_words: int = 32
    rng_seed: int = 0
    max_candidates: int = 50
    norm: NormConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not (1 <= self.k <= self.max_candidates):
            raise ValueError(f"k must be in [1, {self.max_candidates}], got {self.k}")
        if self.min_words > self.max_words:
            raise ValueError("min_words must not exceed max_words")


def read_nbest_dump(path) -> list[RawNBest]:
    """Read ``{id, reference, candidates: [{text, score}], split}`` lines."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                cands = [(c["text"], c["score"]) for c in obj["candidates"]]
                out.append(RawNBest(obj["id"], obj["reference"], tuple(cands), obj["split"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"bad n-best record ({e})", lineno, path) from e
    return out


def _record_rng(seed: int, rid: str) -> random.Random:
    # per-record stream so results do not depend on record order or sharding
    return random.Random(f"{seed}:{rid}")


def select_topk_unique(raw: RawNBest, cfg: BuildConfig = BuildConfig()) -> HypothesisSet:
    """Highest-scoring k candidates with distinct normalized text, in score order.

    With fewer than k distinct candidates the remainder is drawn uniformly,
    with replacement, from the distinct set using a seeded generator.
    """
    if not raw.candidates:
        raise ValueError(f"{raw.id}: no candidates")
    distinct = []
    seen = set()
    for text, _score in raw.candidates[:cfg.max_candidates]:
        t = Transcript.from_raw(text, cfg.norm)
        if t.tokens in seen:
            continue
        seen.add(t.tokens)
        distinct.append(t)
        if len(distinct) == cfg.k:
            break
    items = list(distinct)
    if len(items) < cfg.k:
        rng = _record_rng(cfg.rng_seed, raw.id)
        items.extend(rng.choice(distinct) for _ in range(cfg.k - len(items)))
    return HypothesisSet(tuple(items))


@dataclass
class BuildLog:
    too_short: int = 0
    too_long: int = 0
    duplicate: int = 0
    train_overlap: int = 0
    kept: int = 0


def build_corpus(raws: Iterable[RawNBest], cfg: BuildConfig = BuildConfig(),
                 log: BuildLog | None = None) -> EvalCorpus:
    """Length filter, within-split dedup, then drop dev/test text seen in train."""
    log = log if log is not None else BuildLog()
    survivors = []
    for raw in raws:
        ref = Transcript.from_raw(raw.reference_raw, cfg.norm)
        if len(ref) < cfg.min_words:
            log.too_short += 1
            continue
        if len(ref) > cfg.max_words:
            log.too_long += 1
            continue
        survivors.append((raw, ref))

    seen = {s: set() for s in SPLITS}
    deduped = []
    for raw, ref in survivors:
        if ref.tokens in seen[raw.split]:
            log.duplicate += 1
            continue
        seen[raw.split].add(ref.tokens)
        deduped.append((raw, ref))

    train_refs = seen["train"]
    records = []
    for raw, ref in deduped:
        if raw.split != "train" and ref.tokens in train_refs:
            log.train_overlap += 1
            continue
        records.append(UtteranceRecord(raw.id, ref, select_topk_unique(raw, cfg), raw.split))
    log.kept = len(records)
    logger.info("built corpus: %s", log)
    return EvalCorpus(tuple(records))


def split_stats(corpus) -> dict[str, int]:
    counts = Counter(r.split for r in corpus)
    return {s: counts.get(s, 0) for s in SPLITS}


_REF_KEYS = ("reference", "output", "ref", "ground_truth", "text")
_HYP_KEYS = ("hypotheses", "input", "nbest", "hyps", "candidates")


def import_released(paths: Sequence, cfg: NormConfig = DEFAULT_CONFIG) -> EvalCorpus:
    """Load a released n-best corpus in this package's format or a close variant.

    Accepts JSON-lines or a JSON array per file. Reference/hypothesis field
    names are matched against common aliases; a missing split is taken from
    the file name (``train``/``dev``/``test``).
    """
    records = []
    for path in paths:
        path = Path(path)
        text = path.read_text("utf-8")
        stripped = text.lstrip()
        if stripped.startswith("["):
            objs = json.loads(stripped)
        else:
            objs = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
        file_split = next((s for s in SPLITS if s in path.stem.lower()), None)
        for i, obj in enumerate(objs):
            ref = next((obj[k] for k in _REF_KEYS if k in obj), None)
            hyps = next((obj[k] for k in _HYP_KEYS if k in obj), None)
            if ref is None or hyps is None:
                raise CorpusFormatError("cannot find reference/hypotheses fields", i + 1, path)
            if isinstance(hyps, str):
                hyps = [h for h in hyps.split("\n") if h.strip()]
            hyps = [h["text"] if isinstance(h, dict) else h for h in hyps]
            split = obj.get("split", file_split)
            rid = str(obj.get("id", f"{path.stem}-{i:06d}"))
            records.append(UtteranceRecord(rid, Transcript.from_raw(ref, cfg), HypothesisSet.from_raw(hyps, cfg), split))
    return EvalCorpus(tuple(records))
