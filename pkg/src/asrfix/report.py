"""Score aggregation, score files and result tables."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .metrics.semantic import bertscore_f1, mean, nli_entail_score, q_emb_score
from .metrics.slu import SlotCounts, evaluate_slu, intent_accuracy, slot_micro_f1
from .metrics.wer import edit_counts, partition_noerr

__all__ = [
    "UtteranceScores",
    "MetricReport",
    "ReportError",
    "build_report",
    "aggregate",
    "audit",
    "render_table",
    "write_scores",
    "read_scores",
    "round_half_up",
]

SHAPES = ("partition", "multimetric", "ablation")
NLI_LABEL = "NLI-entail (MENLI-style)"


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class UtteranceScores:
    id: str
    partition: str
    ref_len: int
    substitutions: int
    insertions: int
    deletions: int
    wer: float | None
    q_emb: float | None = None
    bert_f1: float | None = None
    menli: float | None = None
    gold_intent: str | None = None
    pred_intent: str | None = None
    slot_tp: int | None = None
    slot_fp: int | None = None
    slot_fn: int | None = None
    flags: tuple[str, ...] = ()

    @property
    def intent_match(self) -> bool | None:
        if self.gold_intent is None:
            return None
        return self.gold_intent == self.pred_intent


@dataclass(frozen=True)
class MetricReport:
    per_utterance: tuple[UtteranceScores, ...]
    corpus: dict
    metadata: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.per_utterance)

    def to_json(self) -> dict:
        rows = []
        for r in self.per_utterance:
            d = asdict(r)
            d["flags"] = list(r.flags)
            rows.append(d)
        return {"corpus": self.corpus, "metadata": self.metadata, "per_utterance": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "MetricReport":
        names = {f.name for f in fields(UtteranceScores)}
        rows = []
        for d in obj["per_utterance"]:
            d = {k: v for k, v in d.items() if k in names}
            d["flags"] = tuple(d.get("flags", ()))
            rows.append(UtteranceScores(**d))
        return cls(tuple(rows), dict(obj["corpus"]), dict(obj.get("metadata", {})))


def _wer_of(rows, aggregation):
    rows = [r for r in rows if r.ref_len > 0]
    if not rows:
        return None
    if aggregation == "macro":
        return 100.0 * sum(r.wer / 100.0 for r in rows) / len(rows)
    edits = sum(r.substitutions + r.insertions + r.deletions for r in rows)
    return 100.0 * edits / sum(r.ref_len for r in rows)


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return mean(values) if values else None


def aggregate(rows: Sequence[UtteranceScores], aggregation: str = "micro") -> dict:
    """Corpus values from per-utterance rows. Every stored corpus value comes from here."""
    if aggregation not in ("micro", "macro"):
        raise ValueError(f"unknown WER aggregation {aggregation!r}")
    noerr = [r for r in rows if r.partition == "noerr"]
    err = [r for r in rows if r.partition == "err"]
    slu_rows = [r for r in rows if r.gold_intent is not None]
    intent_acc = slot_f1 = None
    if slu_rows:
        intent_acc = 100.0 * intent_accuracy([r.gold_intent for r in slu_rows],
                                             [r.pred_intent for r in slu_rows])
        slot_f1 = slot_micro_f1(SlotCounts(r.slot_tp, r.slot_fp, r.slot_fn) for r in slu_rows)
    return {
        "n": len(rows),
        "n_noerr": len(noerr),
        "n_err": len(err),
        "wer_all": _wer_of(rows, aggregation),
        "wer_noerr": _wer_of(noerr, aggregation),
        "wer_err": _wer_of(err, aggregation),
        "q_emb": _mean_or_none(r.q_emb for r in rows),
        "bert_f1": _mean_or_none(r.bert_f1 for r in rows),
        "menli": _mean_or_none(r.menli for r in rows),
        "intent_acc": intent_acc,
        "slot_f1": slot_f1,
        "slu_excluded": sum(1 for r in rows if "slu_error" in r.flags),
        "semantic_excluded": sum(1 for r in rows if "semantic_error" in r.flags),
    }


def _finals_map(corpus, finals):
    if isinstance(finals, Mapping):
        out = dict(finals)
    else:
        out = {}
        for item in finals:
            rid = getattr(item, "utterance_id", None)
            out[rid] = item.final
    missing = [r.id for r in corpus if r.id not in out]
    if missing:
        raise ReportError(f"no final transcript for {len(missing)} record(s), e.g. {missing[:3]}")
    return out


def build_report(corpus, finals, embedder=None, nli=None, tagger=None,
                 aggregation: str = "micro", metadata: dict | None = None,
                 result_flags: Mapping[str, Sequence[str]] | None = None) -> MetricReport:
    """Score final transcripts against a corpus.

    ``finals`` is a mapping id -> Transcript or a sequence of correction
    results. Semantic and SLU columns are filled only when their providers
    are given. The NoErr/Err partition always follows the corpus top-1.
    """
    records = list(corpus)
    if not records:
        raise ReportError("refusing to score an empty corpus")
    if result_flags is None and not isinstance(finals, Mapping):
        result_flags = {r.utterance_id: r.flags for r in finals}
    fmap = _finals_map(records, finals)
    part = partition_noerr(records)
    slu = evaluate_slu(records, fmap, tagger) if tagger is not None else None
    slu_rows = {r.id: r for r in slu.rows} if slu is not None else {}

    rows = []
    for rec in records:
        final = fmap[rec.id]
        ec = edit_counts(rec.reference.tokens, final.tokens)
        flags = list((result_flags or {}).get(rec.id, ()))
        sem = {}
        if embedder is not None or nli is not None:
            ref_text, hyp_text = rec.reference.text, final.text
            try:
                if embedder is not None:
                    sem["q_emb"] = q_emb_score(ref_text, hyp_text, embedder)
                    sem["bert_f1"] = bertscore_f1(ref_text, hyp_text, embedder)
                if nli is not None:
                    sem["menli"] = nli_entail_score(ref_text, hyp_text, nli)
            except Exception:
                sem = {}
                flags.append("semantic_error")
        slu_kw = {}
        srow = slu_rows.get(rec.id)
        if srow is not None:
            if srow.error:
                flags.append("slu_error")
            else:
                c = srow.counts
                slu_kw = dict(gold_intent=srow.gold.intent, pred_intent=srow.pred.intent,
                              slot_tp=c.tp, slot_fp=c.fp, slot_fn=c.fn)
        rows.append(UtteranceScores(
            id=rec.id,
            partition=part.of(rec.id),
            ref_len=ec.ref_len,
            substitutions=ec.substitutions,
            insertions=ec.insertions,
            deletions=ec.deletions,
            wer=100.0 * ec.wer if ec.ref_len else None,
            flags=tuple(flags),
            **sem,
            **slu_kw,
        ))
    meta = dict(metadata or {})
    meta["wer_aggregation"] = aggregation
    meta.setdefault("embedder", getattr(embedder, "name", None))
    meta.setdefault("nli", getattr(nli, "name", None))
    meta.setdefault("tagger", getattr(tagger, "name", None))
    return MetricReport(tuple(rows), aggregate(rows, aggregation), meta)


def audit(report: MetricReport) -> list[str]:
    """Names of corpus values that do not match a recomputation from rows."""
    recomputed = aggregate(report.per_utterance, report.metadata.get("wer_aggregation", "micro"))
    bad = [k for k, v in recomputed.items() if report.corpus.get(k) != v]
    if report.corpus.get("n_noerr", 0) + report.corpus.get("n_err", 0) != report.size:
        bad.append("partition_sizes")
    return bad


def round_half_up(value: float, places: int = 2) -> str:
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP))


_COLUMNS = {
    "partition": [("WER All", "wer_all"), ("WER NoErr", "wer_noerr"), ("WER Err", "wer_err")],
    "multimetric": [("WER", "wer_all"), ("Q-Emb", "q_emb"), ("BERT F1", "bert_f1"),
                    (NLI_LABEL, "menli"), ("Intent Acc", "intent_acc"), ("Slot F1", "slot_f1")],
    "ablation": [("WER All", "wer_all"), ("WER NoErr", "wer_noerr"), ("WER Err", "wer_err")],
}


def _label(report, default):
    return report.metadata.get("label") or report.metadata.get("mode") or default


def render_table(reports: MetricReport | Sequence[MetricReport], shape: str, fmt: str = "text",
                 baseline: MetricReport | None = None) -> str:
    """Render reports as a partition, multimetric or ablation table.

    Each report is one row; ``baseline`` adds a leading "Baseline" row.
    Values are percentages rounded half-up to 2 decimals.
    """
    if shape not in SHAPES:
        raise ReportError(f"unknown table shape {shape!r}; expected one of {SHAPES}")
    if fmt not in ("text", "markdown"):
        raise ReportError(f"unknown format {fmt!r}")
    if isinstance(reports, MetricReport):
        reports = [reports]
    rows_in = ([("Baseline", baseline)] if baseline is not None else []) + [
        (_label(r, f"run{i + 1}"), r) for i, r in enumerate(reports)]
    if not rows_in:
        raise ReportError("nothing to render")

    cols = _COLUMNS[shape]
    header = ["Run"]
    if shape == "ablation":
        header = ["Setup", "Judge", "Editor"]
    header += [c[0] for c in cols]
    body = []
    for label, rep in rows_in:
        if rep.size == 0:
            raise ReportError(f"report {label!r} has no per-utterance rows")
        row = [label]
        if shape == "ablation":
            mode = rep.metadata.get("mode", "passthrough") if label != "Baseline" else "passthrough"
            judge = mode in ("jea", "judge")
            editor = mode in ("jea", "editor")
            row += ["yes" if judge else "no", "yes" if editor else "no"]
        for title, key in cols:
            value = rep.corpus.get(key)
            if value is None:
                if key == "wer_noerr" and rep.corpus.get("n_noerr") == 0 or \
                        key == "wer_err" and rep.corpus.get("n_err") == 0:
                    row.append("-")
                    continue
                raise ReportError(f"report {label!r} is missing column {title!r} ({key})")
            row.append(round_half_up(value))
        body.append(row)

    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join("---" if i == 0 else "---:" for i in range(len(header))) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in body]
        return "\n".join(lines) + "\n"
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    fmt_row = lambda r: "  ".join(  # noqa: E731
        str(x).ljust(w) if i == 0 else str(x).rjust(w) for i, (x, w) in enumerate(zip(r, widths)))
    lines = [fmt_row(header), "  ".join("-" * w for w in widths)] + [fmt_row(r) for r in body]
    return "\n".join(lines) + "\n"


def write_scores(report: MetricReport, path) -> None:
    if report.size == 0:
        raise ReportError("refusing to write a score file for an empty corpus")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report.to_json(), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")


def read_scores(path) -> MetricReport:
    with open(path, encoding="utf-8") as f:
        return MetricReport.from_json(json.load(f))
