"""Skip-gram / CBOW training with negative sampling over sequence tokens.

The trainer owns everything the kernels need as flat arrays: sentences
as vocabulary indices, per-token contributing rows (own row plus gram
buckets), the integer sampling table and the LCG state. One update is
performed per (center, context) pair inside the window (skip-gram) or
per center with a non-empty window (CBOW); the learning rate decays
linearly from lr to lr * 1e-4 over the total update count across all
epochs. With a fixed seed and workers=1 training is bit-reproducible;
with workers > 1 shards update the shared matrices lock-free and only
statistical reproducibility is kept.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import SeqRecError
from ..subseq import DEFAULT_BUCKET_COUNT, DEFAULT_MAX_N, DEFAULT_MIN_N, bucket_rows, deserialize
from .model import MODE_CBOW, MODE_SG, MODES, EmbeddingModel
from .vocab import TrainingCorpus, Vocabulary

logger = logging.getLogger(__name__)

LR_FLOOR_FRACTION = 1e-4
_M64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrainParams:
    mode: str = MODE_SG
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr: float = 0.025
    seed: int = 1
    min_n: int = DEFAULT_MIN_N
    max_n: int = DEFAULT_MAX_N
    bucket_count: int = DEFAULT_BUCKET_COUNT
    with_boundaries: bool = True
    sample: float = 0.0
    workers: int = 1


def _validate(params: TrainParams) -> None:
    if params.mode not in MODES:
        raise SeqRecError("mode must be one of %s" % (MODES,))
    if params.dim < 1:
        raise SeqRecError("dim must be >= 1")
    if params.window < 1:
        raise SeqRecError("window must be >= 1")
    if params.negatives < 1:
        raise SeqRecError("negatives must be >= 1")
    if params.epochs < 1:
        raise SeqRecError("epochs must be >= 1")
    if not (params.lr > 0.0):
        raise SeqRecError("lr must be > 0")
    if params.min_n < 1 or params.max_n < params.min_n:
        raise SeqRecError(
            "invalid gram range: min_n=%d max_n=%d" % (params.min_n, params.max_n)
        )
    if params.bucket_count < 1:
        raise SeqRecError("bucket_count must be >= 1")
    if params.sample < 0.0:
        raise SeqRecError("sample must be >= 0")
    if params.workers < 1:
        raise SeqRecError("workers must be >= 1")
    if not (0 <= params.seed < 2**63):
        raise SeqRecError("seed must fit in a non-negative 63-bit integer")


def _token_row_arrays(
    vocab: Vocabulary, params: TrainParams
) -> tuple[np.ndarray, np.ndarray]:
    """Contributing rows per vocab token: own row, then gram buckets."""
    v = len(vocab)
    data: list[int] = []
    offsets = np.zeros(v + 1, dtype=np.int64)
    for idx, text in enumerate(vocab.tokens):
        rows = [idx] + [
            v + b
            for b in bucket_rows(
                deserialize(text),
                params.min_n,
                params.max_n,
                params.bucket_count,
                params.with_boundaries,
            )
        ]
        data.extend(rows)
        offsets[idx + 1] = len(data)
    return np.asarray(data, dtype=np.int32), offsets


def _sentence_arrays(
    corpus: TrainingCorpus, vocab: Vocabulary
) -> tuple[np.ndarray, np.ndarray]:
    """Sentences as flat vocab indices; out-of-vocab tokens drop out."""
    flat: list[int] = []
    offsets: list[int] = [0]
    for sentence in corpus.sentences:
        idxs = [
            vocab.token2idx[t.text] for t in sentence if t.text in vocab.token2idx
        ]
        if idxs:
            flat.extend(idxs)
            offsets.append(len(flat))
    return np.asarray(flat, dtype=np.int32), np.asarray(offsets, dtype=np.int64)


def _pair_total(sent_tokens, sent_offsets, window: int, mode: str) -> int:
    """Exact updates per pass, before any subsampling."""
    total = 0
    for s in range(len(sent_offsets) - 1):
        m = int(sent_offsets[s + 1] - sent_offsets[s])
        if m < 2:
            continue
        if mode == MODE_CBOW:
            total += m
        else:
            for i in range(m):
                total += min(m - 1, i + window) - max(0, i - window)
    return total


def _keep_thresholds(vocab: Vocabulary, sample: float) -> np.ndarray | None:
    """word2vec keep probabilities as 31-bit integer thresholds."""
    if sample <= 0.0:
        return None
    total = float(vocab.freqs.sum())
    ratio = (sample * total) / vocab.freqs.astype(np.float64)
    keep = np.sqrt(ratio) + ratio
    np.clip(keep, 0.0, 1.0, out=keep)
    return np.floor(keep * (2**31) + 0.5).astype(np.int64)


def _seed_state(seed: int, shard: int = 0) -> int:
    # one LCG step past a shard-salted seed; any fixed derivation works
    return ((seed ^ (0x9E3779B97F4A7C15 * (shard + 1))) * 25214903917 + 11) & _M64


def train(
    corpus: TrainingCorpus,
    vocab: Vocabulary,
    params: TrainParams,
    backend=None,
) -> EmbeddingModel:
    """Train an embedding model from scratch over the corpus.

    Input rows start uniform in [-0.5/dim, +0.5/dim] (seeded), context
    rows start at zero. Returns the model with per-epoch mean losses
    recorded; a non-finite loss is fatal with an epoch diagnostic.
    """
    _validate(params)
    if backend is None:
        backend = kernels.get_backend(kernels.BACKEND)
    backend_name = getattr(backend, "BACKEND_NAME", "python")

    v = len(vocab)
    rng = np.random.default_rng(params.seed)
    input_vecs = rng.random((v + params.bucket_count, params.dim), dtype=np.float32)
    input_vecs -= 0.5
    input_vecs /= params.dim
    ctx_vecs = np.zeros((v, params.dim), dtype=np.float32)

    row_data, row_offsets = _token_row_arrays(vocab, params)
    sent_tokens, sent_offsets = _sentence_arrays(corpus, vocab)
    per_pass = _pair_total(sent_tokens, sent_offsets, params.window, params.mode)
    keep = _keep_thresholds(vocab, params.sample)
    cum_table = np.ascontiguousarray(vocab.cum_table, dtype=np.int64)

    model = EmbeddingModel(
        dim=params.dim,
        min_n=params.min_n,
        max_n=params.max_n,
        bucket_count=params.bucket_count,
        mode=params.mode,
        window=params.window,
        negatives=params.negatives,
        epochs=params.epochs,
        lr=params.lr,
        seed=params.seed,
        with_boundaries=params.with_boundaries,
        sample=params.sample,
        vocab=vocab,
        input_vectors=input_vecs,
        context_vectors=ctx_vecs,
        epoch_losses=[],
        backend=backend_name,
    )
    if per_pass == 0:
        logger.info("no trainable pairs (all sentences shorter than 2); "
                    "vectors keep their initialization")
        return model

    step = (
        backend.train_epoch_sg if params.mode == MODE_SG else backend.train_epoch_cbow
    )
    alpha_floor = params.lr * LR_FLOOR_FRACTION
    total = per_pass * params.epochs

    if params.workers == 1:
        clock = 0
        state = _seed_state(params.seed)
        for epoch in range(params.epochs):
            clock, state, loss, pairs = step(
                input_vecs, ctx_vecs, sent_tokens, sent_offsets,
                row_data, row_offsets, cum_table,
                params.negatives, params.window,
                params.lr, alpha_floor, clock, total,
                state, keep,
            )
            mean_loss = loss / max(pairs, 1)
            if not np.isfinite(mean_loss):
                raise SeqRecError(
                    "non-finite loss at epoch %d (clock %d)" % (epoch + 1, clock)
                )
            model.epoch_losses.append(mean_loss)
    else:
        _train_sharded(model, params, step, sent_tokens, sent_offsets,
                       row_data, row_offsets, cum_table, keep, alpha_floor)

    if not np.all(np.isfinite(input_vecs)) or not np.all(np.isfinite(ctx_vecs)):
        raise SeqRecError("training produced non-finite vectors")
    return model


def _train_sharded(model, params, step, sent_tokens, sent_offsets,
                   row_data, row_offsets, cum_table, keep, alpha_floor):
    """Lock-free parallel path: sentence shards race on the shared
    matrices (hogwild); per-shard clocks and RNG states."""
    n_sent = len(sent_offsets) - 1
    bounds = np.linspace(0, n_sent, params.workers + 1).astype(np.int64)
    shards = []
    for w in range(params.workers):
        lo, hi = int(bounds[w]), int(bounds[w + 1])
        if lo == hi:
            continue
        off = sent_offsets[lo : hi + 1] - sent_offsets[lo]
        toks = sent_tokens[sent_offsets[lo] : sent_offsets[hi]]
        shard_total = _pair_total(toks, off, params.window, params.mode)
        shards.append((toks, off, shard_total * params.epochs))
    states = [_seed_state(params.seed, i) for i in range(len(shards))]
    clocks = [0] * len(shards)

    def run_epoch(i):
        toks, off, shard_total = shards[i]
        clocks[i], states[i], loss, pairs = step(
            model.input_vectors, model.context_vectors, toks, off,
            row_data, row_offsets, cum_table,
            params.negatives, params.window,
            params.lr, alpha_floor, clocks[i], max(shard_total, 1),
            states[i], keep,
        )
        return loss, pairs

    for epoch in range(params.epochs):
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            results = list(pool.map(run_epoch, range(len(shards))))
        loss = sum(r[0] for r in results)
        pairs = sum(r[1] for r in results)
        mean_loss = loss / max(pairs, 1)
        if not np.isfinite(mean_loss):
            raise SeqRecError("non-finite loss at epoch %d" % (epoch + 1,))
        model.epoch_losses.append(mean_loss)
