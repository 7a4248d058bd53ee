"""Synthetic interaction corpus with topical structure.

Two user populations over disjoint item pools:

* regular users pick all their items from one of the established topics
  and are active across the whole time range, so half their sequences
  land in the first half of the split;
* cold-start users pick from one of the emergent topics and are active
  only in the second half, so they have no first-half footprint at all.

First-half sequences are drawn from a small per-topic pool of canonical
texts, so popular sequences recur across users and the vocabulary has
real frequency mass to train on. Second-half sequences are globally
unique and disjoint from every canonical text: no text ever crosses the
split boundary, which the candidate-index leakage guard requires.
Every draw comes from one seeded generator.
"""

from __future__ import annotations

import numpy as np

from seqrec.corpus import Sequence, UserProfile
from seqrec.subseq import ITEM_SEP

TIME_SPAN = 1_000_000
# regular users: first-half starts stay below 400k, second-half starts at
# 550k+; the 0.5 range cutoff lands near 500k regardless of jitter
_FIRST_STEP = 112_500
_SECOND_START = 550_000


def topic_items(topic: int, pool_size: int) -> list[str]:
    return ["t%02dx%02d" % (topic, i) for i in range(pool_size)]


def make_corpus(
    n_regular: int = 350,
    n_cold: int = 200,
    n_topics: int = 20,
    n_emergent: int = 4,
    pool_size: int = 18,
    canonical_per_topic: int = 15,
    seqs_per_regular: int = 8,
    seqs_per_cold: int = 4,
    min_len: int = 6,
    max_len: int = 9,
    seed: int = 11,
) -> tuple[list[UserProfile], dict[str, int]]:
    """Build profiles plus a user -> topic map.

    Topics 0..n_topics-1 are established, n_topics..n_topics+n_emergent-1
    emergent. Item pools are disjoint across topics.
    """
    rng = np.random.default_rng(seed)
    pools = {
        t: topic_items(t, pool_size) for t in range(n_topics + n_emergent)
    }
    seen_texts: set[str] = set()

    def fresh_items(topic: int) -> tuple[str, ...]:
        pool = pools[topic]
        while True:
            length = int(rng.integers(min_len, max_len + 1))
            idx = rng.integers(0, len(pool), size=length)
            items = tuple(pool[int(i)] for i in idx)
            if ITEM_SEP.join(items) not in seen_texts:
                seen_texts.add(ITEM_SEP.join(items))
                return items

    canonical = {
        t: [fresh_items(t) for _ in range(canonical_per_topic)]
        for t in range(n_topics)
    }

    half = seqs_per_regular // 2
    profiles: list[UserProfile] = []
    user_topic: dict[str, int] = {}

    for u in range(n_regular):
        user_id = "reg%04d" % u
        topic = u % n_topics
        user_topic[user_id] = topic
        seqs = []
        for s in range(seqs_per_regular):
            if s < half:
                start = s * _FIRST_STEP + int(rng.integers(0, 25_000)) + u
                items = canonical[topic][int(rng.integers(canonical_per_topic))]
            else:
                start = (
                    _SECOND_START
                    + (s - half) * _FIRST_STEP
                    + int(rng.integers(0, 25_000))
                    + u
                )
                items = fresh_items(topic)
            seqs.append(
                Sequence(
                    items=items, user_id=user_id, start_time=start, seq_index=s
                )
            )
        profiles.append(UserProfile(user_id=user_id, sequences=seqs))

    for u in range(n_cold):
        user_id = "new%04d" % u
        topic = n_topics + (u % n_emergent)
        user_topic[user_id] = topic
        span = TIME_SPAN - _SECOND_START
        step = span // seqs_per_cold
        seqs = []
        for s in range(seqs_per_cold):
            start = _SECOND_START + s * step + int(rng.integers(0, step // 4)) + u
            seqs.append(
                Sequence(
                    items=fresh_items(topic),
                    user_id=user_id,
                    start_time=start,
                    seq_index=s,
                )
            )
        profiles.append(UserProfile(user_id=user_id, sequences=seqs))

    return profiles, user_topic


def corpus_events(profiles: list[UserProfile]) -> list[tuple[str, str, int]]:
    """Flatten profiles to (user, item, timestamp) rows for raw-log tests."""
    rows = []
    for profile in profiles:
        for seq in profile.sequences:
            for j, item in enumerate(seq.items):
                rows.append((profile.user_id, item, seq.start_time + j))
    return rows
