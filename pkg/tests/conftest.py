import numpy as np
import pytest

from seqrec.corpus import Sequence, UserProfile
from seqrec.embed import TrainParams, build_vocab, corpus_from_profiles, train


def tiny_profiles() -> list[UserProfile]:
    """Two users, two disjoint item vocabularies, fixed timestamps.

    Each user has four sequences: two in the first half of the time
    range, two in the second, so a 0.5 boundary splits them 2/2.
    """
    specs = {
        "u1": ["p q r", "q r p", "r p q p", "p p q"],
        "u2": ["j k l", "k l j", "l j k k", "j j k"],
    }
    profiles = []
    for user_id, texts in sorted(specs.items()):
        seqs = []
        for s, text in enumerate(texts):
            seqs.append(
                Sequence(
                    items=tuple(text.split()),
                    user_id=user_id,
                    start_time=s * 300_000,
                    seq_index=s,
                )
            )
        profiles.append(UserProfile(user_id=user_id, sequences=seqs))
    return profiles


@pytest.fixture(scope="session")
def tiny_model():
    """Small trained model over the tiny corpus; shared read-only."""
    corpus = corpus_from_profiles(tiny_profiles())
    vocab = build_vocab(corpus, min_count=1)
    params = TrainParams(dim=12, epochs=4, seed=9, bucket_count=512)
    model = train(corpus, vocab, params)
    return model, vocab


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
