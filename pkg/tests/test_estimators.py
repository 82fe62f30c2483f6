import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from asrfix.estimators import JudgeEditorCorrector, RepeatedPhraseTruncator, TextNormalizer, check_texts
from asrfix.providers import EchoProvider, ScriptedProvider


def test_pipeline_and_params():
    pipe = make_pipeline(TextNormalizer(), RepeatedPhraseTruncator(m=1, M=3))
    out = pipe.fit_transform(["I want, I want, I want to go!", "Watch TV"])
    assert out == ["i want", "watch t v"]
    assert pipe.get_params()["repeatedphrasetruncator__M"] == 3
    assert clone(TextNormalizer(expand_contractions=True)).get_params()["expand_contractions"] is True


def test_check_texts():
    assert check_texts(np.array(["a", "b"])) == ["a", "b"]
    with pytest.raises(TypeError):
        check_texts("abc")
    with pytest.raises(TypeError):
        check_texts(["a", 3])
    with pytest.raises(ValueError):
        check_texts(np.array([["a"]]))


def test_bad_params_fail_at_fit():
    with pytest.raises(ValueError):
        RepeatedPhraseTruncator(m=3, M=1).fit(["a"])
    with pytest.raises(ValueError):
        TextNormalizer(abbreviation_min_len=1).fit(["a"])


def test_corrector(sample_corpus):
    est = JudgeEditorCorrector(provider=EchoProvider(), mode="jea", parallelism=4).fit(sample_corpus)
    out = est.predict(sample_corpus)
    assert out == [r.hypotheses.top1.text for r in sample_corpus]
    base = JudgeEditorCorrector(mode="passthrough").fit(sample_corpus)
    assert est.score(sample_corpus) == base.score(sample_corpus) < 0
    with pytest.raises(ValueError):
        JudgeEditorCorrector(mode="jea").fit(sample_corpus)


def test_corrector_scripted(sample_corpus):
    est = JudgeEditorCorrector(provider=ScriptedProvider({"synthetic-006": "play some quiet music for the kids kids kids"}))
    out = est.fit(sample_corpus).transform(sample_corpus)
    assert out[5] == "play some quiet music for the kids"
