"""Compare the compiled and numpy kernel backends.

Times skip-gram and CBOW training epochs and the LCS kernel on the
same inputs for every available backend, and checks that the results
agree (integer outputs exactly, float matrices to rounding).

    python benchmarks/bench_kernels.py [--sentences N] [--epochs N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from seqrec.embed import TrainParams, TrainingCorpus, build_vocab, train
from seqrec.kernels import available_backends
from seqrec.subseq import serialize


def make_corpus(n_sentences: int, seed: int) -> TrainingCorpus:
    """Sentences of multi-item tokens with a skewed frequency profile."""
    rng = np.random.default_rng(seed)
    vocab_size = 400
    tokens = []
    for t in range(vocab_size):
        length = 3 + t % 4
        tokens.append(serialize(tuple("i%03d_%d" % (t, j) for j in range(length))))
    # zipf-ish draw: low ranks dominate, like real interaction data
    ranks = rng.zipf(1.3, size=n_sentences * 12) % vocab_size
    sentences = []
    for s in range(n_sentences):
        row = ranks[s * 12 : (s + 1) * 12]
        sentences.append([tokens[int(r)] for r in row])
    return TrainingCorpus(sentences=sentences)


def bench_training(backends, n_sentences: int, epochs: int, seed: int):
    corpus = make_corpus(n_sentences, seed)
    vocab = build_vocab(corpus, 1)
    results = {}
    for mode in ("sg", "cbow"):
        params = TrainParams(
            mode=mode, dim=100, epochs=epochs, seed=seed, max_n=2,
            bucket_count=200_000, window=5, negatives=5,
        )
        models = {}
        for name, backend in backends.items():
            t0 = time.perf_counter()
            model = train(corpus, vocab, params, backend=backend)
            dt = time.perf_counter() - t0
            models[name] = model
            positions = sum(len(s) for s in corpus.sentences) * epochs
            results[(mode, name)] = (dt, positions / dt)
        if len(models) == 2:
            a, b = models["python"], models["c"]
            loss_rel = max(
                abs(x - y) / max(abs(x), 1e-12)
                for x, y in zip(a.epoch_losses, b.epoch_losses)
            )
            agree = np.allclose(
                a.input_vectors, b.input_vectors, rtol=1e-5, atol=1e-7
            )
            results[(mode, "agreement")] = (loss_rel, agree)
    return results


def bench_lcs(backends, n_pairs: int, seed: int):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        la, lb = rng.integers(50, 400, size=2)
        pairs.append(
            (
                rng.integers(0, 40, size=la).astype(np.int32),
                rng.integers(0, 40, size=lb).astype(np.int32),
            )
        )
    cells = sum(len(a) * len(b) for a, b in pairs)
    out = {}
    answers = {}
    for name, backend in backends.items():
        t0 = time.perf_counter()
        answers[name] = [int(backend.lcs_length_i32(a, b)) for a, b in pairs]
        dt = time.perf_counter() - t0
        out[name] = (dt, cells / dt)
    agree = len(set(map(tuple, answers.values()))) == 1
    return out, agree


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sentences", type=int, default=1500)
    parser.add_argument("--epochs", type=int, default=2)
    parser.add_argument("--lcs-pairs", type=int, default=60)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    backends = available_backends()
    print("backends: %s" % ", ".join(sorted(backends)))
    if "c" not in backends:
        print("compiled kernel not built; timing the numpy fallback only")

    results = bench_training(backends, args.sentences, args.epochs, args.seed)
    print("\ntraining (%d sentences, %d epochs, dim 100)" % (args.sentences, args.epochs))
    for mode in ("sg", "cbow"):
        for name in sorted(backends):
            dt, rate = results[(mode, name)]
            print("  %-4s %-7s %7.2fs  %9.0f token positions/s" % (mode, name, dt, rate))
        if (mode, "agreement") in results:
            loss_rel, agree = results[(mode, "agreement")]
            dt_py = results[(mode, "python")][0]
            dt_c = results[(mode, "c")][0]
            print(
                "  %-4s speedup %.1fx, losses agree to %.1e, matrices allclose: %s"
                % (mode, dt_py / dt_c, loss_rel, agree)
            )

    lcs, agree = bench_lcs(backends, args.lcs_pairs, args.seed)
    print("\nlcs (%d pairs, lengths 50-400)" % args.lcs_pairs)
    for name in sorted(lcs):
        dt, rate = lcs[name]
        print("  %-7s %7.2fs  %9.2e cells/s" % (name, dt, rate))
    if len(lcs) == 2:
        print(
            "  speedup %.1fx, lengths agree: %s"
            % (lcs["python"][0] / lcs["c"][0], agree)
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
