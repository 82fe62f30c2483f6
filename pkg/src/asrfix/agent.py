"""Judge-Editor correction over a completion provider.

Pipeline per utterance: prompt -> completion (greedy) -> transcript line ->
normalize -> repeated phrase truncation. Judge-only runs snap the output
back onto one of the input hypotheses; passthrough returns the top-1.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from string import Template
from typing import Sequence

from .core import Transcript, UtteranceRecord
from .metrics.wer import edit_distance
from .providers import CompletionProvider, CompletionRequest, ProviderConfigError
from .textnorm import DEFAULT_CONFIG, NormConfig, normalize
from .truncate import TruncationConfig, truncate_repeated_phrase

logger = logging.getLogger(__name__)

__all__ = [
    "AgentMode",
    "JEA",
    "JUDGE",
    "EDITOR",
    "PASSTHROUGH",
    "PromptTemplate",
    "load_template",
    "build_prompt",
    "parse_completion",
    "CorrectionResult",
    "correct",
    "run_batch",
    "write_results",
    "read_results",
]


@dataclass(frozen=True)
class AgentMode:
    judge: bool
    editor: bool

    @property
    def name(self) -> str:
        return _MODE_NAMES[(self.judge, self.editor)]

    @property
    def passthrough(self) -> bool:
        return not (self.judge or self.editor)

    @classmethod
    def from_name(cls, name: str) -> "AgentMode":
        for flags, label in _MODE_NAMES.items():
            if label == name:
                return cls(*flags)
        raise ValueError(f"unknown mode {name!r}; expected one of {sorted(_MODE_NAMES.values())}")


_MODE_NAMES = {
    (True, True): "jea",
    (True, False): "judge",
    (False, True): "editor",
    (False, False): "passthrough",
}

JEA = AgentMode(True, True)
JUDGE = AgentMode(True, False)
EDITOR = AgentMode(False, True)
PASSTHROUGH = AgentMode(False, False)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str
    hash: str

    @property
    def body(self) -> Template:
        lines = [ln for ln in self.text.splitlines() if not ln.startswith("#")]
        return Template("\n".join(lines).strip("\n"))


def load_template(mode: AgentMode, template_dir=None) -> PromptTemplate:
    fname = f"{mode.name}.txt"
    if template_dir is None:
        text = resources.files("asrfix").joinpath("data/prompts", fname).read_text("utf-8")
    else:
        text = (Path(template_dir) / fname).read_text("utf-8")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    return PromptTemplate(mode.name, text, digest)


def prompt_candidates(record: UtteranceRecord, mode: AgentMode) -> list[Transcript]:
    """Rank-ordered hypotheses with normalized duplicates removed."""
    hyps = list(record.hypotheses)
    if not hyps:
        raise ValueError(f"record {record.id!r} has no hypotheses")
    if mode.editor and not mode.judge:
        return hyps[:1]
    seen = set()
    out = []
    for h in hyps:
        if h.tokens not in seen:
            seen.add(h.tokens)
            out.append(h)
    return out


def build_prompt(record: UtteranceRecord, mode: AgentMode, template: PromptTemplate | None = None) -> str:
    if mode.passthrough:
        raise ValueError("passthrough mode does not prompt")
    template = template or load_template(mode)
    cands = prompt_candidates(record, mode)
    if len(cands) == 1 and mode.editor and not mode.judge:
        listing = cands[0].raw.strip()
    else:
        listing = "\n".join(f"{i}. {c.raw.strip()}" for i, c in enumerate(cands, 1))
    return template.body.substitute(candidates=listing)


_FENCE = re.compile(r"^\s*```")
_PREAMBLE = re.compile(
    r"^(?:here(?:'s| is) the (?:corrected |chosen |selected )?(?:transcript|hypothesis|output)"
    r"|(?:final |corrected |chosen |selected )?(?:transcript|hypothesis|output|answer|correction)"
    r"|corrected)\s*[:\-]\s*",
    re.IGNORECASE,
)
_NUMBERING = re.compile(r"^\(?\d+[.)]\s+")
_WRAPPERS = ("**", "*", '"', "'", "`", "“”", "‘’")


def parse_completion(text: str) -> str | None:
    """Pull the transcript line out of a completion, or None if nothing usable."""
    lines = [ln.strip() for ln in text.splitlines() if not _FENCE.match(ln)]
    lines = [ln for ln in lines if ln]
    if not lines:
        return None
    line = lines[-1]
    line = _PREAMBLE.sub("", line, count=1).strip()
    line = _NUMBERING.sub("", line, count=1).strip()
    changed = True
    while changed and line:
        changed = False
        for w in _WRAPPERS:
            left, right = (w[0], w[1]) if len(w) == 2 and w[0] != w[1] else (w, w)
            if len(line) >= len(left) + len(right) and line.startswith(left) and line.endswith(right):
                line = line[len(left):len(line) - len(right)].strip()
                changed = True
    return line or None


@dataclass(frozen=True)
class CorrectionResult:
    utterance_id: str
    mode: AgentMode
    raw_completion: str
    final: Transcript
    provider_name: str
    template_hash: str | None = None
    flags: tuple[str, ...] = ()
    error: str | None = None
    truncation: tuple[int, int] | None = None
    latency: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "id": self.utterance_id,
            "mode": self.mode.name,
            "provider": self.provider_name,
            "template_hash": self.template_hash,
            "raw_completion": self.raw_completion,
            "final": self.final.raw,
            "flags": list(self.flags),
            "error": self.error,
            "truncation": list(self.truncation) if self.truncation else None,
        }

    @classmethod
    def from_json(cls, obj: dict, cfg: NormConfig = DEFAULT_CONFIG) -> "CorrectionResult":
        return cls(
            utterance_id=obj["id"],
            mode=AgentMode.from_name(obj["mode"]),
            raw_completion=obj.get("raw_completion", ""),
            final=Transcript.from_raw(obj["final"], cfg),
            provider_name=obj.get("provider", ""),
            template_hash=obj.get("template_hash"),
            flags=tuple(obj.get("flags", ())),
            error=obj.get("error"),
            truncation=tuple(obj["truncation"]) if obj.get("truncation") else None,
        )


def _resolve_judge(tokens: Sequence[str], cands: Sequence[Transcript]) -> tuple[Transcript, bool]:
    tokens = tuple(tokens)
    for c in cands:
        if c.tokens == tokens:
            return c, False
    best = min(range(len(cands)), key=lambda i: (edit_distance(cands[i].tokens, tokens), i))
    return cands[best], True


def correct(record: UtteranceRecord, mode: AgentMode, provider: CompletionProvider | None,
            tcfg: TruncationConfig = TruncationConfig(), template: PromptTemplate | None = None,
            max_tokens: int = 256, norm_cfg: NormConfig = DEFAULT_CONFIG) -> CorrectionResult:
    """Correct one utterance. Provider failures propagate to the caller."""
    top1 = record.hypotheses.top1
    if mode.passthrough:
        return CorrectionResult(record.id, mode, "", top1, "passthrough")

    start = time.perf_counter()
    template = template or load_template(mode)
    cands = prompt_candidates(record, mode)
    request = CompletionRequest(
        prompt=build_prompt(record, mode, template),
        max_tokens=max_tokens,
        utterance_id=record.id,
        candidates=tuple(c.raw for c in cands),
    )
    completion = provider.complete(request)
    flags = []
    line = parse_completion(completion)
    tokens = normalize(line, norm_cfg) if line is not None else []
    if not tokens:
        flags.append("unparseable")
        final = top1
    else:
        truncated = truncate_repeated_phrase(tokens, tcfg)
        if len(truncated) < len(tokens):
            flags.append("truncated")
            final = Transcript.from_tokens(truncated)
        else:
            final = Transcript(line, tuple(tokens))
        if mode.judge and not mode.editor:
            final, fell_back = _resolve_judge(final.tokens, cands)
            if fell_back:
                flags.append("judge_fallback")
    return CorrectionResult(
        record.id, mode, completion, final, provider.name, template.hash,
        tuple(flags), truncation=(tcfg.m, tcfg.M), latency=time.perf_counter() - start,
    )


def run_batch(corpus, mode: AgentMode, provider: CompletionProvider | None,
              tcfg: TruncationConfig = TruncationConfig(), parallelism: int = 1,
              template: PromptTemplate | None = None, max_tokens: int = 256) -> list[CorrectionResult]:
    """Correct every record; output order follows the corpus.

    Per-record provider failures become results carrying ``error`` and the
    top-1 fallback. Configuration errors abort the batch.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    records = list(corpus)
    if not mode.passthrough:
        template = template or load_template(mode)

    def one(rec):
        try:
            return correct(rec, mode, provider, tcfg, template, max_tokens)
        except ProviderConfigError:
            raise
        except Exception as e:
            logger.warning("correction failed for %s: %s", rec.id, e)
            return CorrectionResult(
                rec.id, mode, "", rec.hypotheses.top1,
                getattr(provider, "name", "passthrough"),
                template.hash if template else None,
                ("provider_error",), error=str(e) or type(e).__name__, truncation=(tcfg.m, tcfg.M),
            )

    if parallelism == 1 or len(records) <= 1:
        return [one(r) for r in records]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, records))


def write_results(results: Sequence[CorrectionResult], path) -> None:
    from .core import dump_jsonl

    dump_jsonl((r.to_json() for r in results), path)


def read_results(path, cfg: NormConfig = DEFAULT_CONFIG) -> list[CorrectionResult]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                out.append(CorrectionResult.from_json(json.loads(line), cfg))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise ValueError(f"{path}:{lineno}: bad result line ({e})") from e
    return out
