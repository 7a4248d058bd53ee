"""Candidate index and top-k sequence recommendation.

The index is an exhaustive full scan: every candidate sequence is
embedded once at build time, a query is scored against all entries by
cosine similarity, and the top k are returned with ties broken by
token text. Build-time leakage checking is part of the contract: a
candidate whose token text appears in the forbidden (held-out) set is
a fatal error, never silently dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .corpus import Sequence
from .embed.model import EmbeddingModel, compose, similarity
from .errors import LeakageError, SeqRecError
from .subseq import SeqToken, serialize

logger = logging.getLogger(__name__)

DEFAULT_K = 10


@dataclass
class IndexEntry:
    token: SeqToken
    vector: np.ndarray = field(repr=False)  # float64 composed vector
    owner: str


@dataclass
class CandidateIndex:
    model: EmbeddingModel
    entries: list[IndexEntry]
    built_from: tuple[str, ...] = ()
    _matrix: np.ndarray | None = field(default=None, repr=False)
    _norms: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def _scores(self, query_vec: np.ndarray) -> np.ndarray:
        """Cosine of every entry against the query, degenerate norms -> 0."""
        if self._matrix is None:
            self._matrix = np.stack([e.vector for e in self.entries])
            self._norms = np.linalg.norm(self._matrix, axis=1)
        qn = float(np.linalg.norm(query_vec))
        scores = np.zeros(len(self.entries), dtype=np.float64)
        if qn < 1e-12:
            return scores
        ok = self._norms >= 1e-12
        scores[ok] = (self._matrix[ok] @ query_vec) / (self._norms[ok] * qn)
        return scores


@dataclass
class RecommendationList:
    query: SeqToken
    ranked: list[tuple[SeqToken, float]]


def build_index(
    model: EmbeddingModel,
    candidates: Iterable[Sequence],
    built_from: tuple[str, ...] = (),
    forbidden_texts: frozenset[str] | set[str] = frozenset(),
) -> CandidateIndex:
    """Embed candidates into a full-scan index.

    Duplicate token texts keep the first occurrence. Any candidate
    whose text is in forbidden_texts raises LeakageError: held-out
    sequences must never become recommendable.
    """
    entries: list[IndexEntry] = []
    seen: set[str] = set()
    for seq in candidates:
        token = serialize(seq)
        if token.text in forbidden_texts:
            raise LeakageError(
                "candidate of user %s duplicates a held-out sequence" % (seq.user_id,)
            )
        if token.text in seen:
            continue
        seen.add(token.text)
        entries.append(
            IndexEntry(token=token, vector=compose(model, token), owner=seq.user_id)
        )
    return CandidateIndex(model=model, entries=entries, built_from=tuple(built_from))


def recommend(
    index: CandidateIndex, observed, k: int = DEFAULT_K
) -> RecommendationList:
    """Top-k most similar candidate sequences for one observed sequence.

    observed may be a Sequence, a SeqToken or an item iterable; it is
    composed with the index's model (out-of-vocabulary composition
    covers unseen queries). The query's own token text is excluded.
    Ordering: score descending, then token text ascending.
    """
    if k < 1:
        raise SeqRecError("k must be >= 1")
    query = observed if isinstance(observed, SeqToken) else serialize(observed)
    if not index.entries:
        logger.warning("recommend: empty index, returning no recommendations")
        return RecommendationList(query=query, ranked=[])
    qvec = compose(index.model, query)
    scores = index._scores(qvec)
    order = sorted(
        (i for i in range(len(index.entries)) if index.entries[i].token.text != query.text),
        key=lambda i: (-scores[i], index.entries[i].token.text),
    )
    ranked = [(index.entries[i].token, float(scores[i])) for i in order[:k]]
    return RecommendationList(query=query, ranked=ranked)


def recommend_batch(
    index: CandidateIndex,
    observed_by_user: Mapping[str, list[Sequence]],
    k: int = DEFAULT_K,
) -> tuple[dict[str, list[RecommendationList]], int]:
    """recommend() for every observed sequence of every user.

    Returns (results keyed by user in sorted order, omitted) where
    omitted counts users with no observed sequences.
    """
    results: dict[str, list[RecommendationList]] = {}
    omitted = 0
    for user_id in sorted(observed_by_user):
        seqs = observed_by_user[user_id]
        if not seqs:
            omitted += 1
            continue
        results[user_id] = [
            recommend(index, seq, k)
            for seq in sorted(seqs, key=lambda s: s.seq_index)
        ]
    if omitted:
        logger.warning("recommend_batch: %d users had no observed sequences", omitted)
    return results, omitted
