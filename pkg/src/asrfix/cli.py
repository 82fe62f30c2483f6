"""Command-line entry point: ``asrfix <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .agent import AgentMode, CorrectionResult, load_template, read_results, run_batch, write_results
from .core import EvalCorpus, HypothesisSet, Transcript, UtteranceRecord, read_corpus, write_corpus
from .dataset import BuildConfig, BuildLog, build_corpus, read_nbest_dump, split_stats
from .metrics.semantic import HashingEmbeddingProvider, LexicalNliProvider
from .metrics.slu import MockTagger
from .metrics.wer import partition_noerr
from .providers import (
    ENV_API_KEY,
    ENV_CACHE_DIR,
    ENV_ENDPOINT,
    ENV_MODEL,
    CachedCompletionProvider,
    CachedEmbeddingProvider,
    CachedNliProvider,
    CachedTagger,
    EchoProvider,
    HttpEmbeddingProvider,
    HttpNliProvider,
    HttpTagger,
    OpenAICompatibleProvider,
    ScriptedProvider,
)
from .report import build_report, read_scores, render_table, write_scores
from .truncate import TruncationConfig, truncate_repeated_phrase
from .textnorm import normalize

logger = logging.getLogger("asrfix")

SAMPLE = "sample"
SAMPLE_SCRIPT = "sample"
MODES = ("jea", "judge", "editor", "passthrough")


def _data_path(name):
    return resources.files("asrfix").joinpath("data", name)


def _corpus_path(value):
    return _data_path("sample_corpus.jsonl") if value == SAMPLE else value


def _load_corpus(value):
    return read_corpus(_corpus_path(value))


def _cache_dir(args):
    return args.cache_dir or os.environ.get(ENV_CACHE_DIR)


def _completion_provider(args):
    if args.provider == "echo":
        provider = EchoProvider()
    elif args.provider == "scripted":
        if not args.script:
            raise ValueError("--provider scripted needs --script FILE (or 'sample')")
        script = _data_path("sample_script.json") if args.script == SAMPLE_SCRIPT else args.script
        provider = ScriptedProvider.from_file(script)
    else:
        provider = OpenAICompatibleProvider(args.endpoint, args.model, args.api_key,
                                            timeout=args.timeout, rate_limit=args.rate_limit)
    cache = _cache_dir(args)
    if cache and args.provider == "endpoint":
        provider = CachedCompletionProvider(provider, cache)
    return provider


def _split_spec(value):
    kind, _, arg = value.partition("=")
    return kind, arg or None


def _embedder(args):
    if args.embedder in (None, "none"):
        return None
    kind, url = _split_spec(args.embedder)
    if kind == "hash":
        p = HashingEmbeddingProvider()
    elif kind == "endpoint":
        p = HttpEmbeddingProvider(url, args.embed_model, args.api_key)
    else:
        raise ValueError(f"unknown embedder {args.embedder!r}")
    cache = _cache_dir(args)
    return CachedEmbeddingProvider(p, cache) if cache else p


def _nli(args):
    if args.nli in (None, "none"):
        return None
    kind, url = _split_spec(args.nli)
    if kind == "lexical":
        p = LexicalNliProvider()
    elif kind == "endpoint":
        p = HttpNliProvider(url, args.api_key)
    else:
        raise ValueError(f"unknown NLI provider {args.nli!r}")
    cache = _cache_dir(args)
    return CachedNliProvider(p, cache) if cache else p


def _tagger(args):
    if args.tagger in (None, "none"):
        return None
    kind, url = _split_spec(args.tagger)
    if kind == "mock":
        p = MockTagger()
    elif kind == "endpoint":
        p = HttpTagger(url, args.api_key)
    else:
        raise ValueError(f"unknown tagger {args.tagger!r}")
    cache = _cache_dir(args)
    return CachedTagger(p, cache) if cache else p


def _finals_and_meta(corpus, results_path):
    """Finals from a results file, or the top-1 hypotheses when none is given."""
    if not results_path:
        finals = {r.id: r.hypotheses.top1 for r in corpus}
        return finals, {"mode": "baseline", "provider": None, "template_hash": None}, None
    results = read_results(results_path)
    by_id = {r.utterance_id: r for r in results}
    finals = {rid: r.final for rid, r in by_id.items()}
    flags = {rid: r.flags for rid, r in by_id.items()}
    modes = sorted({r.mode.name for r in results})
    providers = sorted({r.provider_name for r in results})
    hashes = sorted({r.template_hash for r in results if r.template_hash})
    truncs = sorted({tuple(r.truncation) for r in results if r.truncation})
    meta = {
        "mode": modes[0] if len(modes) == 1 else modes,
        "provider": providers[0] if len(providers) == 1 else providers,
        "template_hash": hashes[0] if len(hashes) == 1 else (hashes or None),
        "truncation": [list(t) for t in truncs] or None,
    }
    return finals, meta, flags


def _subset(corpus, which):
    if which == "all":
        return corpus
    part = partition_noerr(corpus)
    return corpus.subset(part.err if which == "err" else part.no_err)


def _evaluate(args, corpus, results_path, embedder=None, nli=None, tagger=None, label=None):
    corpus = _subset(corpus, getattr(args, "subset", "all"))
    finals, meta, flags = _finals_and_meta(corpus, results_path)
    meta["subset"] = getattr(args, "subset", "all")
    if label or getattr(args, "label", None):
        meta["label"] = label or args.label
    return build_report(corpus, finals, embedder=embedder, nli=nli, tagger=tagger,
                        aggregation="macro" if getattr(args, "macro", False) else "micro",
                        metadata=meta, result_flags=flags)


# --- subcommands ---------------------------------------------------------------


def cmd_build_dataset(args):
    cfg = BuildConfig(k=args.k, min_words=args.min_words, max_words=args.max_words, rng_seed=args.seed)
    log = BuildLog()
    corpus = build_corpus(read_nbest_dump(args.input), cfg, log)
    write_corpus(corpus, args.out)
    print(json.dumps({"splits": split_stats(corpus), "dropped": {
        "too_short": log.too_short, "too_long": log.too_long,
        "duplicate": log.duplicate, "train_overlap": log.train_overlap}}, sort_keys=True))


def cmd_correct(args):
    corpus = _load_corpus(args.corpus)
    mode = AgentMode.from_name(args.mode)
    provider = None if mode.passthrough else _completion_provider(args)
    template = None if mode.passthrough else load_template(mode, args.template_dir)
    results = run_batch(corpus, mode, provider, TruncationConfig(args.m, args.M),
                        args.parallelism, template, args.max_tokens)
    write_results(results, args.out)
    failed = sum(1 for r in results if r.error)
    flagged = sum(1 for r in results if r.flags)
    total_latency = sum(r.latency for r in results)
    logger.info("corrected %d records (%d failed, %d flagged, %.2fs provider time)",
                len(results), failed, flagged, total_latency)


def cmd_truncate(args):
    cfg = TruncationConfig(args.m, args.M)
    if args.results:
        results = read_results(args.results)
        out = []
        for r in results:
            toks = truncate_repeated_phrase(r.final.tokens, cfg)
            out.append(r if len(toks) == len(r.final) else CorrectionResult(
                r.utterance_id, r.mode, r.raw_completion, Transcript.from_tokens(toks),
                r.provider_name, r.template_hash, r.flags + ("truncated",), r.error, (cfg.m, cfg.M)))
        write_results(out, args.out or args.results)
        return
    if args.corpus:
        if not args.out:
            raise ValueError("--corpus needs --out")

        def trunc(h):
            toks = truncate_repeated_phrase(h.tokens, cfg)
            return h if len(toks) == len(h) else Transcript.from_tokens(toks)

        recs = [UtteranceRecord(rec.id, rec.reference, HypothesisSet(tuple(trunc(h) for h in rec.hypotheses)), rec.split)
                for rec in _load_corpus(args.corpus)]
        write_corpus(EvalCorpus(tuple(recs)), args.out)
        return
    stream = open(args.input, encoding="utf-8") if args.input else sys.stdin
    with stream:
        for line in stream:
            print(" ".join(truncate_repeated_phrase(normalize(line), cfg)))


def cmd_wer(args):
    corpus = _load_corpus(args.corpus)
    report = _evaluate(args, corpus, args.results)
    print("id\tpartition\tref_len\tsub\tins\tdel\twer")
    for r in report.per_utterance:
        wer = "nan" if r.wer is None else f"{r.wer:.4f}"
        print(f"{r.id}\t{r.partition}\t{r.ref_len}\t{r.substitutions}\t{r.insertions}\t{r.deletions}\t{wer}")
    keys = ("wer_all", "wer_noerr", "wer_err") if args.by_partition else ("wer_all",)
    for k in keys:
        v = report.corpus[k]
        print(f"#corpus\t{k}\t{'-' if v is None else f'{v:.4f}'}")


def cmd_score_semantic(args):
    corpus = _load_corpus(args.corpus)
    report = _evaluate(args, corpus, args.results, embedder=_embedder(args), nli=_nli(args))
    c = report.corpus
    print(json.dumps({k: c[k] for k in ("n", "q_emb", "bert_f1", "menli", "semantic_excluded")}, sort_keys=True))
    if args.out:
        write_scores(report, args.out)


def cmd_score_slu(args):
    corpus = _load_corpus(args.corpus)
    report = _evaluate(args, corpus, args.results, tagger=_tagger(args))
    c = report.corpus
    print(json.dumps({k: c[k] for k in ("n", "intent_acc", "slot_f1", "slu_excluded")}, sort_keys=True))
    if args.out:
        write_scores(report, args.out)


def cmd_evaluate(args):
    corpus = _load_corpus(args.corpus)
    report = _evaluate(args, corpus, args.results, embedder=_embedder(args), nli=_nli(args),
                       tagger=_tagger(args))
    if args.out:
        write_scores(report, args.out)
    print(json.dumps(report.corpus, sort_keys=True))


def cmd_report(args):
    reports = [read_scores(p) for p in args.scores]
    baseline = read_scores(args.baseline) if args.baseline else None
    sys.stdout.write(render_table(reports, args.shape, args.format, baseline))


def cmd_ablate(args):
    corpus = _load_corpus(args.corpus)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    provider = _completion_provider(args)
    tagger = _tagger(args)
    tcfg = TruncationConfig(args.m, args.M)
    baseline = _evaluate(args, corpus, None, tagger=tagger, label="Baseline")
    write_scores(baseline, out_dir / "baseline.scores.json")
    reports = []
    for name, label in (("passthrough", "Passthrough"), ("editor", "Editor-only"),
                        ("judge", "Judge-only"), ("jea", "Judge+Editor")):
        mode = AgentMode.from_name(name)
        template = None if mode.passthrough else load_template(mode, args.template_dir)
        results = run_batch(corpus, mode, None if mode.passthrough else provider, tcfg,
                            args.parallelism, template, args.max_tokens)
        res_path = out_dir / f"{name}.results.jsonl"
        write_results(results, res_path)
        report = _evaluate(args, corpus, res_path, tagger=tagger, label=label)
        write_scores(report, out_dir / f"{name}.scores.json")
        reports.append(report)
    sys.stdout.write(render_table(reports, "ablation", args.format, baseline))


# --- argument parsing ----------------------------------------------------------


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    g.add_argument("--cache-dir", default=None,
                   help=f"provider response cache directory (default: ${ENV_CACHE_DIR} or no cache)")
    g.add_argument("--log-level", default="WARNING",
                   choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="logging level (default: WARNING)")
    return p


def _add_provider_flags(p):
    g = p.add_argument_group("completion provider")
    g.add_argument("--provider", choices=("endpoint", "echo", "scripted"), default="endpoint",
                   help="completion backend (default: endpoint)")
    g.add_argument("--script", default=None,
                   help="JSON {id: completion} table for --provider scripted; 'sample' for the bundled one")
    g.add_argument("--endpoint", default=None, help=f"API base URL (default: ${ENV_ENDPOINT})")
    g.add_argument("--model", default=None, help=f"model name (default: ${ENV_MODEL})")
    g.add_argument("--api-key", default=None, help=f"bearer token (default: ${ENV_API_KEY})")
    g.add_argument("--timeout", type=float, default=60.0, help="HTTP timeout in seconds (default: 60)")
    g.add_argument("--rate-limit", type=float, default=None, help="max requests per second (default: none)")
    g.add_argument("--max-tokens", type=int, default=256, help="completion token budget (default: 256)")
    g.add_argument("--template-dir", default=None, help="directory of prompt templates (default: bundled)")
    g.add_argument("--parallelism", type=int, default=1, help="concurrent provider calls (default: 1)")
    _add_trunc_flags(p)


def _add_trunc_flags(p):
    p.add_argument("--m", type=int, default=1, help="shortest repeated phrase to prune (default: 1)")
    p.add_argument("--M", type=int, default=5, help="longest repeated phrase to prune (default: 5)")


def _add_scorer_flags(p, embedder=False, nli=False, tagger=False):
    if embedder:
        p.add_argument("--embedder", default="none",
                       help="none | hash (offline, non-semantic) | endpoint=URL (default: none)")
        p.add_argument("--embed-model", default=None, help="model name sent to the embedding endpoint")
    if nli:
        p.add_argument("--nli", default="none", help="none | lexical (offline) | endpoint=URL (default: none)")
    if tagger:
        p.add_argument("--tagger", default="none", help="none | mock | endpoint=URL (default: none)")
    if (embedder or nli or tagger) and not any(a.dest == "api_key" for a in p._actions):
        p.add_argument("--api-key", default=None, help=f"bearer token for scorer endpoints (default: ${ENV_API_KEY})")


def _add_eval_flags(p):
    p.add_argument("--corpus", required=True, help="corpus file, or 'sample' for the bundled fixture")
    p.add_argument("--results", default=None, help="correction results file (default: score the top-1)")
    p.add_argument("--subset", choices=("all", "err", "noerr"), default="all",
                   help="restrict to the top-1 error partition (default: all)")
    p.add_argument("--macro", action="store_true", help="average per-utterance WER instead of pooling edits")
    p.add_argument("--label", default=None, help="row label used by `report`")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="asrfix", description="Post-ASR correction and evaluation toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("build-dataset", parents=[common], help="build a top-k corpus from n-best dumps")
    p.add_argument("--input", required=True, help="n-best dump (JSON lines)")
    p.add_argument("--out", required=True, help="output corpus file")
    p.add_argument("--k", type=int, default=5, help="hypotheses per utterance (default: 5)")
    p.add_argument("--min-words", type=int, default=4, help="shortest kept reference (default: 4)")
    p.add_argument("--max-words", type=int, default=32, help="longest kept reference (default: 32)")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("correct", parents=[common], help="run the correction agent over a corpus")
    p.add_argument("--mode", choices=MODES, default="jea", help="agent roles (default: jea)")
    p.add_argument("--corpus", required=True, help="corpus file, or 'sample'")
    p.add_argument("--out", required=True, help="results file (JSON lines)")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("truncate", parents=[common], help="prune repeated-phrase loops")
    p.add_argument("--input", default=None, help="text file, one transcript per line (default: stdin)")
    p.add_argument("--results", default=None, help="re-truncate finals in a results file")
    p.add_argument("--corpus", default=None, help="truncate hypotheses in a corpus file")
    p.add_argument("--out", default=None, help="output file for --results/--corpus")
    _add_trunc_flags(p)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("wer", parents=[common], help="word error rate per utterance and corpus")
    _add_eval_flags(p)
    p.add_argument("--by-partition", action="store_true", help="also print NoErr/Err corpus WER")
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("score-semantic", parents=[common], help="embedding and NLI scores")
    _add_eval_flags(p)
    _add_scorer_flags(p, embedder=True, nli=True)
    p.add_argument("--out", default=None, help="score file (JSON)")
    p.set_defaults(func=cmd_score_semantic)

    p = sub.add_parser("score-slu", parents=[common], help="intent accuracy and slot micro-F1")
    _add_eval_flags(p)
    _add_scorer_flags(p, tagger=True)
    p.add_argument("--out", default=None, help="score file (JSON)")
    p.set_defaults(func=cmd_score_slu)

    p = sub.add_parser("evaluate", parents=[common], help="all metrics into one score file")
    _add_eval_flags(p)
    _add_scorer_flags(p, embedder=True, nli=True, tagger=True)
    p.add_argument("--out", default=None, help="score file (JSON)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", parents=[common], help="render score files as a table")
    p.add_argument("--scores", nargs="+", required=True, help="score files, one row each")
    p.add_argument("--baseline", default=None, help="score file for a leading Baseline row")
    p.add_argument("--shape", choices=("partition", "multimetric", "ablation"), default="partition",
                   help="table layout (default: partition)")
    p.add_argument("--format", choices=("text", "markdown"), default="text", help="output format (default: text)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("ablate", parents=[common], help="compare passthrough/editor/judge/jea runs")
    p.add_argument("--corpus", required=True, help="corpus file, or 'sample'")
    p.add_argument("--out-dir", required=True, help="directory for per-mode results and scores")
    p.add_argument("--format", choices=("text", "markdown"), default="text", help="output format (default: text)")
    p.add_argument("--subset", choices=("all", "err", "noerr"), default="all", help=argparse.SUPPRESS)
    _add_provider_flags(p)
    _add_scorer_flags(p, tagger=True)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as e:
        logger.debug("pipeline failure", exc_info=True)
        print(f"asrfix {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
