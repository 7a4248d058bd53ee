"""Embedding model: composition, similarity, persistence.

The input matrix stacks one row per vocabulary token followed by
bucket_count hashed gram rows; the context matrix has one row per
vocabulary token. A token's usable vector is the arithmetic mean of
its own input row (when in vocabulary) and its gram bucket rows; an
out-of-vocabulary token composes from gram bucket rows alone, which is
what makes cold-start queries possible.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, SeqRecError
from ..subseq import SeqToken, bucket_rows, deserialize, serialize
from .vocab import Vocabulary, _make_cum_table

MODE_SG = "sg"
MODE_CBOW = "cbow"
MODES = (MODE_SG, MODE_CBOW)

_MAGIC = b"SEQVEC\r\n"
_VERSION = 1
# fixed little-endian header after magic+version:
# dim, min_n, max_n, mode, window, negatives, epochs, with_boundaries,
# min_count, bucket_count, vocab_size, seed, lr, sample
_HEADER = "<9i3qdd"


@dataclass
class EmbeddingModel:
    dim: int
    min_n: int
    max_n: int
    bucket_count: int
    mode: str
    window: int
    negatives: int
    epochs: int
    lr: float
    seed: int
    with_boundaries: bool
    sample: float
    vocab: Vocabulary
    input_vectors: np.ndarray = field(repr=False)  # (V + bucket_count, dim) f32
    context_vectors: np.ndarray = field(repr=False)  # (V, dim) f32
    epoch_losses: list[float] = field(default_factory=list)
    backend: str = "python"

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)


def _token_of(token_or_items) -> SeqToken:
    if isinstance(token_or_items, SeqToken):
        return token_or_items
    if isinstance(token_or_items, str):
        # a bare string is a serialized token text, never an item list
        return SeqToken(text=token_or_items, items=deserialize(token_or_items))
    return serialize(token_or_items)


def gram_rows(model: EmbeddingModel, token_or_items) -> np.ndarray:
    """Bucket-row indices (offset past the vocab block) of a token's grams."""
    token = _token_of(token_or_items)
    buckets = bucket_rows(
        token.items, model.min_n, model.max_n, model.bucket_count,
        model.with_boundaries,
    )
    return model.vocab_size + np.asarray(buckets, dtype=np.int64)


def token_rows(model: EmbeddingModel, token_or_items) -> np.ndarray:
    """All contributing input rows: own row first (if in vocab), then grams."""
    token = _token_of(token_or_items)
    rows = gram_rows(model, token)
    idx = model.vocab.token2idx.get(token.text)
    if idx is None:
        return rows
    return np.concatenate(([idx], rows))


def compose(model: EmbeddingModel, token_or_items) -> np.ndarray:
    """Composed vector: float64 mean of the contributing input rows.

    In-vocabulary tokens average their own row together with the gram
    bucket rows; unseen tokens average the bucket rows alone.
    """
    rows = token_rows(model, token_or_items)
    if rows.size == 0:
        raise SeqRecError("token has no grams to compose from")
    return model.input_vectors[rows].mean(axis=0, dtype=np.float64)


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; degenerate norms (< 1e-12) score 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SeqRecError(
            "dimension mismatch: %s vs %s" % (a.shape, b.shape)
        )
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(model: EmbeddingModel, path) -> None:
    """Versioned binary: header, vocab block, raw float32 LE matrices."""
    path = Path(path)
    mode_code = MODES.index(model.mode)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(
            struct.pack(
                _HEADER,
                model.dim,
                model.min_n,
                model.max_n,
                mode_code,
                model.window,
                model.negatives,
                model.epochs,
                1 if model.with_boundaries else 0,
                model.vocab.min_count,
                model.bucket_count,
                len(model.vocab),
                model.seed,
                model.lr,
                model.sample,
            )
        )
        for token, freq in zip(model.vocab.tokens, model.vocab.freqs):
            raw = token.encode("utf-8")
            fh.write(struct.pack("<Iq", len(raw), int(freq)))
            fh.write(raw)
        fh.write(struct.pack("<i", len(model.epoch_losses)))
        for x in model.epoch_losses:
            fh.write(struct.pack("<d", x))
        fh.write(np.ascontiguousarray(model.input_vectors, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(model.context_vectors, dtype="<f4").tobytes())


def load_model(path) -> EmbeddingModel:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise FormatError("cannot read %s: %s" % (path, exc)) from exc
    if blob[: len(_MAGIC)] != _MAGIC:
        raise FormatError("%s: not a model file (bad magic)" % (path,))
    off = len(_MAGIC)
    (version,) = struct.unpack_from("<I", blob, off)
    off += 4
    if version != _VERSION:
        raise FormatError("%s: unsupported model version %d" % (path, version))
    fields = struct.unpack_from(_HEADER, blob, off)
    off += struct.calcsize(_HEADER)
    (
        dim,
        min_n,
        max_n,
        mode_code,
        window,
        negatives,
        epochs,
        with_boundaries,
        min_count,
        bucket_count,
        vocab_size,
        seed,
        lr,
        sample,
    ) = fields
    tokens: list[str] = []
    freq_list: list[int] = []
    for _ in range(vocab_size):
        length, freq = struct.unpack_from("<Iq", blob, off)
        off += struct.calcsize("<Iq")
        tokens.append(blob[off : off + length].decode("utf-8"))
        off += length
        freq_list.append(freq)
    (n_losses,) = struct.unpack_from("<i", blob, off)
    off += 4
    losses = list(struct.unpack_from("<%dd" % n_losses, blob, off))
    off += 8 * n_losses
    n_input = (vocab_size + bucket_count) * dim
    n_ctx = vocab_size * dim
    need = off + 4 * (n_input + n_ctx)
    if len(blob) != need:
        raise FormatError(
            "%s: truncated matrices (%d bytes, expected %d)" % (path, len(blob), need)
        )
    input_vectors = (
        np.frombuffer(blob, dtype="<f4", count=n_input, offset=off)
        .reshape(vocab_size + bucket_count, dim)
        .copy()
    )
    off += 4 * n_input
    context_vectors = (
        np.frombuffer(blob, dtype="<f4", count=n_ctx, offset=off)
        .reshape(vocab_size, dim)
        .copy()
    )
    freqs = np.asarray(freq_list, dtype=np.int64)
    vocab = Vocabulary(
        tokens=tokens,
        freqs=freqs,
        token2idx={t: i for i, t in enumerate(tokens)},
        min_count=min_count,
        cum_table=_make_cum_table(freqs),
    )
    return EmbeddingModel(
        dim=dim,
        min_n=min_n,
        max_n=max_n,
        bucket_count=bucket_count,
        mode=MODES[mode_code],
        window=window,
        negatives=negatives,
        epochs=epochs,
        lr=lr,
        seed=seed,
        with_boundaries=bool(with_boundaries),
        sample=sample,
        vocab=vocab,
        input_vectors=input_vectors,
        context_vectors=context_vectors,
        epoch_losses=losses,
    )


def export_jsonl(model: EmbeddingModel, path) -> None:
    """Composed vector per vocabulary token, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for text in model.vocab.tokens:
            vec = compose(model, SeqToken(text=text, items=deserialize(text)))
            fh.write(
                json.dumps(
                    {"token": text, "vector": [float(x) for x in vec]},
                    sort_keys=True,
                )
            )
            fh.write("\n")
