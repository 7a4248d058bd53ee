"""Sequence-aware recommendation from subword-style sequence embeddings.

The library learns vector representations of whole user-interaction
sequences (playlists, trips, sessions) by treating each sequence as a
token and its contiguous item n-grams as subword units, recommends
ranked lists of multi-item sequences by cosine similarity over those
vectors, and evaluates recommendations against held-out sequences with
ROUGE-N / ROUGE-L style overlap metrics.
"""

__version__ = "0.1.0"

from .errors import FormatError, LeakageError, SeqRecError, VocabularyError

__all__ = [
    "FormatError",
    "LeakageError",
    "SeqRecError",
    "VocabularyError",
    "__version__",
]
