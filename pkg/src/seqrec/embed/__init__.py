"""Sequence-token embeddings: vocabulary, training, composition."""

from .model import (
    MODE_CBOW,
    MODE_SG,
    MODES,
    EmbeddingModel,
    compose,
    export_jsonl,
    gram_rows,
    load_model,
    save_model,
    similarity,
    token_rows,
)
from .trainer import TrainParams, train
from .vocab import TrainingCorpus, Vocabulary, build_vocab, corpus_from_profiles

__all__ = [
    "MODE_CBOW",
    "MODE_SG",
    "MODES",
    "EmbeddingModel",
    "TrainParams",
    "TrainingCorpus",
    "Vocabulary",
    "build_vocab",
    "compose",
    "corpus_from_profiles",
    "export_jsonl",
    "gram_rows",
    "load_model",
    "save_model",
    "similarity",
    "token_rows",
    "train",
]
