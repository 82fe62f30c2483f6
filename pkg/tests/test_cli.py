import json

import pytest

from asrfix.cli import build_parser, main
from asrfix.report import audit, read_scores


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_args_usage(capsys):
    code, out, err = run([], capsys)
    assert code == 2 and "usage" in err


def test_unknown_flag(capsys):
    code, _, err = run(["wer", "--corpus", "sample", "--bogus"], capsys)
    assert code == 2


def test_pipeline_error_exit_1(tmp_path, capsys):
    code, _, err = run(["wer", "--corpus", str(tmp_path / "missing.jsonl")], capsys)
    assert code == 1 and "error" in err


def test_help_lists_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    assert set(sub) == {"build-dataset", "correct", "truncate", "wer", "score-semantic", "score-slu",
                        "evaluate", "report", "ablate"}
    for name, p in sub.items():
        text = p.format_help()
        assert "--log-level" in text and "--cache-dir" in text and "--seed" in text, name


def test_build_dataset(tmp_path, capsys):
    dump = tmp_path / "d.jsonl"
    rows = [
        {"id": "a", "reference": "one two three four", "split": "train",
         "candidates": [{"text": "one two three four", "score": 0}, {"text": "one two tree four", "score": -1}]},
        {"id": "b", "reference": "one two three four", "split": "test",
         "candidates": [{"text": "x", "score": 0}]},
        {"id": "c", "reference": "too short", "split": "dev", "candidates": [{"text": "x", "score": 0}]},
    ]
    dump.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    code, out, _ = run(["build-dataset", "--input", str(dump), "--out", str(tmp_path / "c.jsonl"), "--seed", "3"],
                       capsys)
    assert code == 0
    stats = json.loads(out)
    assert stats["splits"] == {"train": 1, "dev": 0, "test": 0}
    assert stats["dropped"]["train_overlap"] == 1 and stats["dropped"]["too_short"] == 1


def test_truncate_stdin(tmp_path, capsys):
    f = tmp_path / "in.txt"
    f.write_text("i want i want i want to go\nthe quick brown fox\n")
    code, out, _ = run(["truncate", "--input", str(f), "--m", "1", "--M", "3"], capsys)
    assert code == 0 and out.splitlines() == ["i want", "the quick brown fox"]


def test_truncate_results_file(tmp_path, capsys):
    res = tmp_path / "r.jsonl"
    assert main(["correct", "--corpus", "sample", "--mode", "jea", "--provider", "scripted",
                 "--script", "sample", "--out", str(res), "--M", "1"]) == 0
    assert main(["truncate", "--results", str(res), "--out", str(tmp_path / "t.jsonl"), "--M", "5"]) == 0
    lines = [json.loads(x) for x in (tmp_path / "t.jsonl").read_text().splitlines()]
    assert next(x for x in lines if x["id"] == "synthetic-016")["final"] == "tell me a joke about cats"


def test_wer_subcommand(capsys):
    code, out, _ = run(["wer", "--corpus", "sample", "--by-partition"], capsys)
    assert code == 0
    tail = out.splitlines()[-3:]
    assert tail[0].startswith("#corpus\twer_all\t") and tail[1] == "#corpus\twer_noerr\t0.0000"


def test_score_commands(tmp_path, capsys):
    code, out, _ = run(["score-semantic", "--corpus", "sample", "--embedder", "hash", "--nli", "lexical"], capsys)
    assert code == 0 and json.loads(out)["semantic_excluded"] == 0
    code, out, _ = run(["score-slu", "--corpus", "sample", "--tagger", "mock"], capsys)
    assert code == 0 and set(json.loads(out)) == {"n", "intent_acc", "slot_f1", "slu_excluded"}


def test_evaluate_and_report(tmp_path, capsys):
    res, sc, base = tmp_path / "r.jsonl", tmp_path / "s.json", tmp_path / "b.json"
    assert main(["correct", "--corpus", "sample", "--provider", "echo", "--out", str(res), "--parallelism", "4"]) == 0
    assert main(["evaluate", "--corpus", "sample", "--results", str(res), "--tagger", "mock",
                 "--embedder", "hash", "--nli", "lexical", "--out", str(sc)]) == 0
    assert main(["evaluate", "--corpus", "sample", "--tagger", "mock", "--embedder", "hash",
                 "--nli", "lexical", "--out", str(base), "--label", "ASR"]) == 0
    capsys.readouterr()
    rep = read_scores(sc)
    assert audit(rep) == [] and rep.metadata["mode"] == "jea" and rep.metadata["template_hash"]
    code, out, _ = run(["report", "--scores", str(sc), "--baseline", str(base), "--shape", "multimetric",
                        "--format", "markdown"], capsys)
    assert code == 0 and len(out.splitlines()) == 4


def test_evaluate_err_subset(tmp_path, capsys):
    sc = tmp_path / "s.json"
    assert main(["evaluate", "--corpus", "sample", "--subset", "err", "--out", str(sc)]) == 0
    rep = read_scores(sc)
    assert rep.corpus["n_noerr"] == 0 and rep.corpus["n"] == rep.corpus["n_err"]


def test_ablate_echo_collapses(tmp_path, capsys):
    code, out, _ = run(["ablate", "--corpus", "sample", "--provider", "echo", "--tagger", "mock",
                        "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    rows = out.splitlines()[2:]
    assert len(rows) == 5
    assert len({tuple(r.split()[-3:]) for r in rows}) == 1


def test_endpoint_without_config_fails(monkeypatch, tmp_path, capsys):
    monkeypatch.delenv("HYPO_ENDPOINT", raising=False)
    code, _, err = run(["correct", "--corpus", "sample", "--out", str(tmp_path / "r.jsonl")], capsys)
    assert code == 1 and "HYPO_ENDPOINT" in err
