"""Sequence tokens, item n-grams and hashed gram buckets.

A whole item sequence is one vocabulary token; its serialized text is
the item ids joined with the unit separator U+001F. Sub-sequence
information enters the embedding through contiguous item n-grams,
optionally taken over the sequence padded with begin/end markers, and
each gram is mapped to a bucket row by FNV-1a hashing of its
serialized form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import FormatError, SeqRecError

# Serialized token text joins item ids with the unit separator; the
# boundary markers are reserved pseudo-items. None of the three may
# appear inside an item id (enforced at ingestion).
ITEM_SEP = "\x1f"
BOS = "\x02"
EOS = "\x03"
RESERVED_CHARS = (ITEM_SEP, BOS, EOS)

# Readable aliases used by the debug gram dump.
_DISPLAY = {BOS: "<s>", EOS: "</s>"}

FNV_OFFSET_BASIS = 2166136261
FNV_PRIME = 16777619
_U32 = 0xFFFFFFFF

DEFAULT_MIN_N = 1
DEFAULT_MAX_N = 5
DEFAULT_BUCKET_COUNT = 2_000_000


@dataclass(frozen=True)
class SeqToken:
    """A whole sequence viewed as one vocabulary token."""

    text: str
    items: tuple[str, ...]


@dataclass(frozen=True)
class SubseqGram:
    """One contiguous n-gram of items (boundary markers count as items)."""

    items: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.items)

    def key(self) -> str:
        """Serialized form used for hashing and for the debug dump."""
        return ITEM_SEP.join(self.items)

    def display(self) -> str:
        return " ".join(_DISPLAY.get(it, it) for it in self.items)


def validate_item_id(item_id: str) -> None:
    """Reject ids that would corrupt serialization. Raises FormatError."""
    if not item_id:
        raise FormatError("empty item id")
    for ch in RESERVED_CHARS:
        if ch in item_id:
            raise FormatError(
                "item id %r contains reserved character %r" % (item_id, ch)
            )


def _as_items(seq) -> tuple[str, ...]:
    items = getattr(seq, "items", seq)
    if callable(items):  # guard against dict-likes
        raise SeqRecError("expected a sequence of item ids")
    return tuple(items)


def serialize(seq) -> SeqToken:
    """Turn a sequence (or iterable of item ids) into its SeqToken.

    The text form is injective and losslessly reversible: ids are
    joined with U+001F, which no id may contain.
    """
    items = _as_items(seq)
    if not items:
        raise FormatError("cannot serialize an empty sequence")
    return SeqToken(text=ITEM_SEP.join(items), items=items)


def deserialize(text: str) -> tuple[str, ...]:
    """Inverse of serialize(); round-trips exactly."""
    if not text:
        raise SeqRecError("cannot deserialize an empty token text")
    return tuple(text.split(ITEM_SEP))


def extract_ngrams(
    seq,
    min_n: int = DEFAULT_MIN_N,
    max_n: int = DEFAULT_MAX_N,
    with_boundaries: bool = True,
) -> list[SubseqGram]:
    """All contiguous item n-grams with min_n <= n <= max_n.

    Grams are taken over (BOS ++ items ++ EOS) when with_boundaries is
    set, and emitted left-to-right then increasing-n: the outer sweep
    is the start position, the inner one the gram length. For a padded
    length m the bag holds sum over n of (m - n + 1) grams, so
    duplicates are kept (bag semantics).
    """
    if min_n < 1 or max_n < min_n:
        raise SeqRecError(
            "invalid gram range: min_n=%d max_n=%d" % (min_n, max_n)
        )
    items = _as_items(seq)
    if with_boundaries:
        items = (BOS,) + items + (EOS,)
    m = len(items)
    grams: list[SubseqGram] = []
    for pos in range(m):
        top = min(max_n, m - pos)
        for n in range(min_n, top + 1):
            grams.append(SubseqGram(items[pos : pos + n]))
    return grams


def fnv1a_32(data: bytes) -> int:
    """32-bit FNV-1a over raw bytes (offset basis 2166136261, prime 16777619)."""
    h = FNV_OFFSET_BASIS
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _U32
    return h


def gram_bucket(gram: SubseqGram, bucket_count: int = DEFAULT_BUCKET_COUNT) -> int:
    """Deterministic bucket row for a gram: FNV-1a of its key, mod bucket_count."""
    if bucket_count < 1:
        raise SeqRecError("bucket_count must be >= 1")
    return fnv1a_32(gram.key().encode("utf-8")) % bucket_count


def bucket_rows(
    items: Iterable[str],
    min_n: int,
    max_n: int,
    bucket_count: int,
    with_boundaries: bool = True,
) -> list[int]:
    """Bucket ids for every gram of a sequence, in gram emission order."""
    return [
        gram_bucket(g, bucket_count)
        for g in extract_ngrams(tuple(items), min_n, max_n, with_boundaries)
    ]
