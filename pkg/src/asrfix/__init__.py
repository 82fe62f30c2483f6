"""Post-ASR correction toolkit: n-best corpora, a Judge-Editor correction
agent, repetition-loop truncation, and lexical/semantic/SLU evaluation."""

from .agent import EDITOR, JEA, JUDGE, PASSTHROUGH, AgentMode, CorrectionResult, correct, run_batch
from .core import EvalCorpus, HypothesisSet, Transcript, UtteranceRecord, read_corpus, write_corpus
from .estimators import JudgeEditorCorrector, RepeatedPhraseTruncator, TextNormalizer
from .textnorm import NormConfig, detokenize, normalize
from .truncate import TruncationConfig, repeat_count, truncate_repeated_phrase

__version__ = "0.1.0"

__all__ = [
    "AgentMode",
    "CorrectionResult",
    "EDITOR",
    "JEA",
    "JUDGE",
    "PASSTHROUGH",
    "correct",
    "run_batch",
    "EvalCorpus",
    "HypothesisSet",
    "Transcript",
    "UtteranceRecord",
    "read_corpus",
    "write_corpus",
    "JudgeEditorCorrector",
    "RepeatedPhraseTruncator",
    "TextNormalizer",
    "NormConfig",
    "detokenize",
    "normalize",
    "TruncationConfig",
    "repeat_count",
    "truncate_repeated_phrase",
]
