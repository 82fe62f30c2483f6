from .semantic import (
    HashingEmbeddingProvider,
    LexicalNliProvider,
    SemanticScores,
    bertscore_f1,
    nli_entail_score,
    q_emb_score,
)
from .slu import MockTagger, SluAnnotation, SlotCounts, evaluate_slu, intent_accuracy, slot_counts, slot_micro_f1
from .wer import EditCounts, Partition, corpus_wer, edit_counts, macro_wer, partition_noerr

__all__ = [
    "HashingEmbeddingProvider",
    "LexicalNliProvider",
    "SemanticScores",
    "bertscore_f1",
    "nli_entail_score",
    "q_emb_score",
    "MockTagger",
    "SluAnnotation",
    "SlotCounts",
    "evaluate_slu",
    "intent_accuracy",
    "slot_counts",
    "slot_micro_f1",
    "EditCounts",
    "Partition",
    "corpus_wer",
    "edit_counts",
    "macro_wer",
    "partition_noerr",
]
