"""Command-line surface.

Subcommands mirror the pipeline: ingest a raw interaction log into a
sequences file, split it by time, train embeddings on part A,
recommend for query sequences, score recommendation files, or do all
of it in one deterministic `run`. `sweep` repeats runs along one
hyperparameter axis and `compare` diffs report CSVs. Configuration
comes from defaults, then an optional key=value file, then flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import CONFIG_TYPES, build_config, parse_config_file
from .corpus import (
    UserProfile,
    build_sequences,
    make_split,
    parse_log,
    read_sequences,
    read_split,
    write_sequences,
    write_split,
)
from .embed import (
    TrainParams,
    build_vocab,
    corpus_from_profiles,
    export_jsonl,
    load_model,
    save_model,
    train,
)
from .errors import SeqRecError
from .harness import (
    read_report_csv,
    run as run_eval,
    sweep as run_sweep,
    write_compare_csv,
    write_report_csv,
    write_sweep_csv,
    compare_rows,
)
from .recindex import build_index, recommend
from .rouge import score_list
from .subseq import extract_ngrams

logger = logging.getLogger(__name__)

_CONFIG_FLAGS = (
    ("--config-type", "config_type", str, "evaluation layout (%s)" % ",".join(CONFIG_TYPES)),
    ("--mode", "mode", str, "training mode: sg or cbow"),
    ("--min-n", "min_n", int, "smallest gram length"),
    ("--max-n", "max_n", int, "largest gram length"),
    ("--dim", "dim", int, "embedding dimensionality"),
    ("--window", "window", int, "context window in tokens"),
    ("--negatives", "negatives", int, "negative samples per update"),
    ("--epochs", "epochs", int, "training passes"),
    ("--lr", "lr", float, "initial learning rate"),
    ("--min-count", "min_count", int, "minimum token frequency"),
    ("--bucket-count", "bucket_count", int, "hashed gram bucket rows"),
    ("--sample", "sample", float, "frequent-token subsampling threshold (0 = off)"),
    ("--k", "k", int, "recommendations per query"),
    ("--n-neighbors", "n_neighbors", int, "recorded neighbor count (full scan ignores it)"),
    ("--gap-seconds", "gap_seconds", int, "session gap when no session ids"),
    ("--boundary", "boundary", float, "first-half fraction of the time range"),
    ("--coldstart-fraction", "coldstart_fraction", float, "prefix fraction for cold-start queries"),
    ("--workers", "workers", int, "training shards (>1 drops bit-reproducibility)"),
    ("--seed", "seed", int, "RNG seed"),
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value configuration file")
    for flag, dest, ftype, help_text in _CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=ftype, default=None, help=help_text)
    bounds = parser.add_mutually_exclusive_group()
    bounds.add_argument("--with-boundaries", dest="with_boundaries",
                        action="store_true", default=None,
                        help="pad grams with begin/end markers (default)")
    bounds.add_argument("--no-boundaries", dest="with_boundaries",
                        action="store_false", default=None,
                        help="grams over bare items")


def _config_from_args(args) -> "EvalConfig":
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {}
    for _flag, dest, _t, _h in _CONFIG_FLAGS:
        overrides[dest] = getattr(args, dest, None)
    overrides["with_boundaries"] = getattr(args, "with_boundaries", None)
    return build_config(file_values, overrides)


def _profiles_from_sequences(seqs) -> list[UserProfile]:
    per_user: dict[str, list] = {}
    for seq in seqs:
        per_user.setdefault(seq.user_id, []).append(seq)
    return [
        UserProfile(u, sorted(s, key=lambda q: q.seq_index))
        for u, s in sorted(per_user.items())
    ]


def _split_from_args(args, config):
    if getattr(args, "splits", None):
        return read_split(args.splits)
    events, _skipped = parse_log(args.input, args.format)
    profiles = build_sequences(events, config.gap_seconds)
    return make_split(profiles, config.boundary)


def _params_from_config(config, seed: int) -> TrainParams:
    return TrainParams(
        mode=config.mode, dim=config.dim, window=config.window,
        negatives=config.negatives, epochs=config.epochs, lr=config.lr,
        seed=seed, min_n=config.min_n, max_n=config.max_n,
        bucket_count=config.bucket_count,
        with_boundaries=config.with_boundaries, sample=config.sample,
        workers=config.workers,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_ingest(args) -> int:
    config = _config_from_args(args)
    events, skipped = parse_log(args.input, args.format)
    profiles = build_sequences(events, config.gap_seconds)
    sequences = [s for p in profiles for s in p.sequences]
    write_sequences(args.output, sequences)
    print(
        "ingested %d events into %d sequences (%d rows skipped)"
        % (len(events), len(sequences), skipped),
        file=sys.stderr,
    )
    return 0


def _cmd_split(args) -> int:
    config = _config_from_args(args)
    profiles = _profiles_from_sequences(read_sequences(args.sequences))
    split = make_split(profiles, config.boundary)
    write_split(split, args.outdir)
    sizes = {p: sum(len(v) for v in split.part(p).values()) for p in "ABCD"}
    print(
        "split sizes: A=%(A)d B=%(B)d C=%(C)d D=%(D)d" % sizes, file=sys.stderr
    )
    return 0


def _cmd_train(args) -> int:
    config = _config_from_args(args)
    seed = config.require_seed()
    split = read_split(args.splits)
    corpus = corpus_from_profiles(split.part_a)
    vocab = build_vocab(corpus, config.min_count)
    model = train(corpus, vocab, _params_from_config(config, seed))
    save_model(model, args.model)
    if args.export_jsonl:
        export_jsonl(model, args.export_jsonl)
    print(
        "trained %d tokens, dim %d, backend %s; losses %s"
        % (
            len(vocab),
            model.dim,
            model.backend,
            ["%.4f" % x for x in model.epoch_losses],
        ),
        file=sys.stderr,
    )
    return 0


def _rec_to_json(user_id: str, seq_index: int, rec) -> str:
    return json.dumps(
        {
            "user": user_id,
            "seq_index": seq_index,
            "recommendations": [
                {"items": list(token.items), "score": score}
                for token, score in rec.ranked
            ],
        },
        sort_keys=True,
    )


def _cmd_recommend(args) -> int:
    config = _config_from_args(args)
    model = load_model(args.model)
    candidates = []
    for path in args.candidates:
        candidates.extend(read_sequences(path))
    index = build_index(model, candidates)
    queries = read_sequences(args.queries)
    lines = []
    for seq in sorted(queries, key=lambda s: (s.user_id, s.seq_index)):
        rec = recommend(index, seq, config.k)
        lines.append(_rec_to_json(seq.user_id, seq.seq_index, rec))
    Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("recommended for %d queries" % len(lines), file=sys.stderr)
    return 0


_SCORE_HEADER = "user,n_lists,rouge1_precision,rouge1_recall,rouge1_f,rougeL_precision,rougeL_recall,rougeL_f"


def _cmd_score(args) -> int:
    refs_by_user: dict[str, list] = {}
    for seq in read_sequences(args.references):
        refs_by_user.setdefault(seq.user_id, []).append(seq)
    rows = []
    try:
        payloads = [
            json.loads(line)
            for line in Path(args.recommendations).read_text("utf-8").splitlines()
            if line.strip()
        ]
    except (OSError, json.JSONDecodeError) as exc:
        raise SeqRecError("cannot read recommendations: %s" % (exc,)) from exc
    per_user: dict[str, list] = {}
    unmatched = 0
    for payload in payloads:
        user = payload["user"]
        if user not in refs_by_user:
            unmatched += 1
            continue
        ref_items = [r.items for r in refs_by_user[user]]
        ranked = [
            (type("T", (), {"items": tuple(r["items"])})(), r["score"])
            for r in payload["recommendations"]
        ]
        scores = score_list(ref_items, ranked, metrics=("rouge_1", "rouge_l"))
        per_user.setdefault(user, []).append(scores)
    if unmatched:
        logger.warning("score: %d recommendation rows had no references", unmatched)
    if not per_user:
        raise SeqRecError("no recommendation rows matched the references")

    def _avg(pairs):
        n = len(pairs)
        out = []
        for metric in ("rouge_1", "rouge_l"):
            for attr in ("precision", "recall", "f_measure"):
                out.append(sum(getattr(p[metric], attr) for p in pairs) / n)
        return out

    lines = [_SCORE_HEADER]
    all_lists = []
    for user in sorted(per_user):
        vals = _avg(per_user[user])
        all_lists.extend(per_user[user])
        lines.append("%s,%d,%s" % (user, len(per_user[user]),
                                   ",".join(repr(v) for v in vals)))
    if args.micro:
        summary = _avg(all_lists)
        label = "MICRO_AVG"
        n = len(all_lists)
    else:
        user_rows = [_avg(per_user[u]) for u in sorted(per_user)]
        summary = [sum(r[i] for r in user_rows) / len(user_rows) for i in range(6)]
        label = "MACRO_AVG"
        n = len(user_rows)
    lines.append("%s,%d,%s" % (label, n, ",".join(repr(v) for v in summary)))
    Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("scored %d users" % len(per_user), file=sys.stderr)
    return 0


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    config.require_seed()
    split = _split_from_args(args, config)
    collector = [] if args.recommendations_out else None
    report = run_eval(config, split, rec_collector=collector)
    write_report_csv(report, args.output)
    if args.recommendations_out:
        lines = [_rec_to_json(user, -1, rec) for user, rec in collector]
        Path(args.recommendations_out).write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    r1 = report.scores["rouge_1"]
    rl = report.scores["rouge_l"]
    print(
        "config %s: rouge1 P=%.4f R=%.4f, rougeL P=%.4f R=%.4f "
        "(%d users, %.1fs)"
        % (
            config.config_type,
            r1["precision"],
            r1["recall"],
            rl["precision"],
            rl["recall"],
            report.users_evaluated,
            report.wall_clock_s,
        ),
        file=sys.stderr,
    )
    return 0


def _cmd_sweep(args) -> int:
    config = _config_from_args(args)
    config.require_seed()
    split = _split_from_args(args, config)
    caster = str if args.axis == "mode" else int
    values = []
    for chunk in args.values.split(","):
        chunk = chunk.strip()
        try:
            values.append(caster(chunk))
        except ValueError:
            values.append(chunk)  # recorded as a failed run by sweep()
    results = run_sweep(config, args.axis, values, split)
    write_sweep_csv(results, args.output)
    failed = sum(1 for r in results if r.failed)
    print(
        "sweep over %s: %d runs, %d failed" % (args.axis, len(results), failed),
        file=sys.stderr,
    )
    return 0


def _cmd_compare(args) -> int:
    rows = []
    for path in args.reports:
        rows.extend(read_report_csv(path))
    if len(rows) < 2:
        raise SeqRecError("compare needs at least two report rows")
    write_compare_csv(compare_rows(rows), args.output)
    print("compared %d reports" % len(rows), file=sys.stderr)
    return 0


def _cmd_grams(args) -> int:
    config = _config_from_args(args)
    with_boundaries = (
        config.with_boundaries if args.with_boundaries is None else args.with_boundaries
    )
    if args.items:
        sequences = [tuple(args.items.split())]
    elif args.sequences:
        sequences = [s.items for s in read_sequences(args.sequences)]
    else:
        raise SeqRecError("grams needs --items or --sequences")
    for items in sequences:
        for gram in extract_ngrams(items, config.min_n, config.max_n, with_boundaries):
            print(gram.display())
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqrec",
        description="sequence embeddings, sequence recommendation, ROUGE evaluation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="raw event log to a sequences file")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", default="tsv_events",
                   choices=("tsv_events", "tsv_sessions"))
    p.add_argument("--output", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="time-based A/B/C/D split")
    p.add_argument("--sequences", required=True, type=Path)
    p.add_argument("--outdir", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train embeddings on part A of a split")
    p.add_argument("--splits", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--export-jsonl", type=Path, default=None,
                   help="also dump composed token vectors as JSON lines")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("recommend", help="top-k sequences for query sequences")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--candidates", required=True, type=Path, nargs="+")
    p.add_argument("--queries", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("score", help="score a recommendations file against references")
    p.add_argument("--recommendations", required=True, type=Path)
    p.add_argument("--references", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--micro", action="store_true",
                   help="average over lists instead of users")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("run", help="full evaluation run (seed required)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="raw event log")
    src.add_argument("--splits", type=Path, help="directory from `seqrec split`")
    p.add_argument("--format", default="tsv_events",
                   choices=("tsv_events", "tsv_sessions"))
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--recommendations-out", type=Path, default=None)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="one run per value along an axis")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path)
    src.add_argument("--splits", type=Path)
    p.add_argument("--format", default="tsv_events",
                   choices=("tsv_events", "tsv_sessions"))
    p.add_argument("--axis", required=True, choices=("max_n", "dim", "mode"))
    p.add_argument("--values", required=True,
                   help="comma-separated values for the axis")
    p.add_argument("--output", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="pairwise deltas between report CSVs")
    p.add_argument("--reports", required=True, type=Path, nargs="+")
    p.add_argument("--output", required=True, type=Path)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("grams", help="debug dump of a sequence's grams")
    p.add_argument("--items", default=None, help="space-separated item ids")
    p.add_argument("--sequences", default=None, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_grams)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeqRecError as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
