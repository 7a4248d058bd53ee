"""Training corpus and token vocabulary.

A sentence is one user's temporally ordered sequence tokens; the
vocabulary maps token texts to dense indices (first-occurrence order)
and carries the negative-sampling table built from frequencies raised
to 0.75.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..corpus import UserProfile
from ..errors import VocabularyError
from ..subseq import SeqToken, serialize

# Sampling weights are kept as integers (scaled by 2**16) so both
# kernel backends draw identical negatives from identical bits.
_WEIGHT_SCALE = 65536
NEGATIVE_EXPONENT = 0.75


@dataclass
class TrainingCorpus:
    """Per-user sentences of sequence tokens."""

    sentences: list[list[SeqToken]]

    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def corpus_from_profiles(profiles: Iterable[UserProfile]) -> TrainingCorpus:
    """One sentence per user, tokens in seq_index (temporal) order.

    Users are visited in sorted user_id order so downstream training
    is independent of profile list order.
    """
    sentences = []
    for prof in sorted(profiles, key=lambda p: p.user_id):
        seqs = sorted(prof.sequences, key=lambda s: s.seq_index)
        if seqs:
            sentences.append([serialize(s) for s in seqs])
    return TrainingCorpus(sentences=sentences)


@dataclass
class Vocabulary:
    tokens: list[str]
    freqs: np.ndarray  # int64, aligned with tokens
    token2idx: dict[str, int]
    min_count: int
    cum_table: np.ndarray = field(repr=False)  # int64 cumulative weights

    def __len__(self) -> int:
        return len(self.tokens)

    def sampling_probabilities(self) -> np.ndarray:
        """Normalized draw probabilities implied by the table."""
        weights = np.diff(self.cum_table, prepend=0).astype(np.float64)
        return weights / weights.sum()


def _make_cum_table(freqs: np.ndarray) -> np.ndarray:
    weights = np.floor(
        np.power(freqs.astype(np.float64), NEGATIVE_EXPONENT) * _WEIGHT_SCALE + 0.5
    ).astype(np.int64)
    return np.cumsum(weights)


def build_vocab(corpus: TrainingCorpus, min_count: int = 1) -> Vocabulary:
    """Count token texts and keep the ones seen at least min_count times.

    Indices follow first occurrence. An empty result is fatal: nothing
    could be trained.
    """
    if min_count < 1:
        raise VocabularyError("min_count must be >= 1")
    counts: dict[str, int] = {}
    for sentence in corpus.sentences:
        for token in sentence:
            counts[token.text] = counts.get(token.text, 0) + 1
    tokens = [t for t, c in counts.items() if c >= min_count]
    if not tokens:
        raise VocabularyError(
            "no token of %d reached min_count=%d" % (len(counts), min_count)
        )
    freqs = np.array([counts[t] for t in tokens], dtype=np.int64)
    token2idx = {t: i for i, t in enumerate(tokens)}
    return Vocabulary(
        tokens=tokens,
        freqs=freqs,
        token2idx=token2idx,
        min_count=min_count,
        cum_table=_make_cum_table(freqs),
    )
