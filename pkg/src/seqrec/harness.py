"""End-to-end evaluation runs, sweeps and configuration comparison.

A run takes an EvalSplit and a configuration, trains embeddings on
part A (always, whatever the configuration trains its candidate pool
on), indexes the training-side sequences, queries once per test user
with their most recent training-side sequence (cold-start users fall
back to an out-of-vocabulary composition of their first held-out
sequence's prefix) and macro-averages best-match ROUGE-1 / ROUGE-L
scores over users. Reports serialize to CSV deterministically: two
runs with the same seed and configuration produce identical bytes.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import EvalConfig, PART_MAP
from .corpus import EvalSplit, Sequence
from .embed import TrainParams, build_vocab, corpus_from_profiles, train
from .errors import SeqRecError
from .recindex import CandidateIndex, RecommendationList, build_index, recommend
from .rouge import score_list
from .subseq import serialize

logger = logging.getLogger(__name__)

REPORT_METRICS = ("rouge_1", "rouge_l")

_SCORE_COLUMNS = (
    "rouge1_precision",
    "rouge1_recall",
    "rouge1_f",
    "rougeL_precision",
    "rougeL_recall",
    "rougeL_f",
)
_COUNT_COLUMNS = (
    "users_evaluated",
    "cold_start_users",
    "skipped_users",
    "empty_recommendations",
    "clamp_events",
    "flagged_train_exclusions",
)
_CONFIG_COLUMNS = (
    "config_type",
    "mode",
    "min_n",
    "max_n",
    "dim",
    "window",
    "negatives",
    "epochs",
    "lr",
    "min_count",
    "bucket_count",
    "sample",
    "with_boundaries",
    "k",
    "n_neighbors",
    "gap_seconds",
    "boundary",
    "coldstart_fraction",
    "workers",
    "seed",
)
REPORT_COLUMNS = _CONFIG_COLUMNS + _SCORE_COLUMNS + _COUNT_COLUMNS


@dataclass
class RunReport:
    config: EvalConfig
    scores: dict[str, dict[str, float]]  # metric -> {precision, recall, f}
    users_evaluated: int
    cold_start_users: int
    skipped_users: int
    empty_recommendations: int
    clamp_events: int
    flagged_train_exclusions: int
    wall_clock_s: float = 0.0  # kept off the CSV: reports must be bit-stable

    def row(self) -> dict[str, str]:
        """Deterministic CSV row; floats use repr so they round-trip."""
        out: dict[str, str] = {}
        for col in _CONFIG_COLUMNS:
            out[col] = _fmt(getattr(self.config, col))
        r1 = self.scores["rouge_1"]
        rl = self.scores["rouge_l"]
        out["rouge1_precision"] = repr(r1["precision"])
        out["rouge1_recall"] = repr(r1["recall"])
        out["rouge1_f"] = repr(r1["f"])
        out["rougeL_precision"] = repr(rl["precision"])
        out["rougeL_recall"] = repr(rl["recall"])
        out["rougeL_f"] = repr(rl["f"])
        for col in _COUNT_COLUMNS:
            out[col] = _fmt(getattr(self, col))
        return out


def _fmt(value) -> str:
    """repr floats (round-trip exactly), plain text everything else."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _collect_part_sequences(split: EvalSplit, part: str) -> list[Sequence]:
    per_user = split.part(part)
    rows = [s for seqs in per_user.values() for s in seqs]
    rows.sort(key=lambda s: (s.user_id, s.seq_index))
    return rows


def run(
    config: EvalConfig,
    split: EvalSplit,
    backend=None,
    rec_collector: list | None = None,
) -> RunReport:
    """One full evaluation run. See the module docstring for the flow."""
    seed = config.require_seed()
    t0 = time.perf_counter()
    train_parts, test_parts = PART_MAP[config.config_type]
    flagged = set(split.flagged_users)

    # Embeddings always learn from part A.
    corpus_a = corpus_from_profiles(split.part_a)
    if not corpus_a.sentences:
        raise SeqRecError("part A is empty; nothing to train embeddings on")
    vocab = build_vocab(corpus_a, config.min_count)
    params = TrainParams(
        mode=config.mode,
        dim=config.dim,
        window=config.window,
        negatives=config.negatives,
        epochs=config.epochs,
        lr=config.lr,
        seed=seed,
        min_n=config.min_n,
        max_n=config.max_n,
        bucket_count=config.bucket_count,
        with_boundaries=config.with_boundaries,
        sample=config.sample,
        workers=config.workers,
    )
    model = train(corpus_a, vocab, params, backend=backend)

    # Candidate pool: training-side sequences. A user whose single
    # second-half sequence doubles as B and D must not see it on the
    # training side while D is held out (D always is).
    flagged_exclusions = 0
    candidates: list[Sequence] = []
    observed: dict[str, list[Sequence]] = {}
    for part in train_parts:
        for seq in _collect_part_sequences(split, part):
            if part == "B" and seq.user_id in flagged:
                flagged_exclusions += 1
                continue
            candidates.append(seq)
            observed.setdefault(seq.user_id, []).append(seq)
    if not candidates:
        raise SeqRecError(
            "no candidate sequences in parts %s" % (",".join(train_parts),)
        )

    # Held-out references, one entry per underlying sequence.
    references: dict[str, dict[int, Sequence]] = {}
    for part in test_parts:
        for seq in _collect_part_sequences(split, part):
            references.setdefault(seq.user_id, {})[seq.seq_index] = seq
    if not references:
        raise SeqRecError("no test sequences in parts %s" % (",".join(test_parts),))

    forbidden = frozenset(
        serialize(seq).text for refs in references.values() for seq in refs.values()
    )
    index = build_index(
        model, candidates, built_from=train_parts, forbidden_texts=forbidden
    )

    sums = {m: {"precision": 0.0, "recall": 0.0, "f": 0.0} for m in REPORT_METRICS}
    users_evaluated = 0
    cold_start_users = 0
    skipped_users = 0
    empty_recommendations = 0
    clamp_events = 0

    for user_id in sorted(references):
        refs = sorted(
            references[user_id].values(), key=lambda s: (s.start_time, s.seq_index)
        )
        own = sorted(
            observed.get(user_id, ()), key=lambda s: (s.start_time, s.seq_index)
        )
        if own:
            query = serialize(own[-1])
            ref_items = [r.items for r in refs]
        else:
            # Cold start: query from the first held-out sequence's
            # prefix; the peeked prefix never gets scored, so that
            # sequence is represented by its unpeeked suffix.
            cold_start_users += 1
            first = refs[0]
            cut = max(1, int(len(first.items) * config.coldstart_fraction))
            prefix = first.items[:cut]
            suffix = first.items[cut:]
            ref_items = ([suffix] if suffix else []) + [r.items for r in refs[1:]]
            if not ref_items:
                skipped_users += 1
                continue
            query = serialize(prefix)
        rec = recommend(index, query, config.k)
        if rec_collector is not None:
            rec_collector.append((user_id, rec))
        if not rec.ranked:
            empty_recommendations += 1
        scores = score_list(ref_items, rec, metrics=REPORT_METRICS)
        for metric in REPORT_METRICS:
            s = scores[metric]
            sums[metric]["precision"] += s.precision
            sums[metric]["recall"] += s.recall
            sums[metric]["f"] += s.f_measure
            clamp_events += s.clamp_events
        users_evaluated += 1

    if users_evaluated == 0:
        raise SeqRecError("no users left to evaluate")
    macro = {
        m: {k: v / users_evaluated for k, v in parts.items()}
        for m, parts in sums.items()
    }
    report = RunReport(
        config=config,
        scores=macro,
        users_evaluated=users_evaluated,
        cold_start_users=cold_start_users,
        skipped_users=skipped_users,
        empty_recommendations=empty_recommendations,
        clamp_events=clamp_events,
        flagged_train_exclusions=flagged_exclusions,
        wall_clock_s=time.perf_counter() - t0,
    )
    logger.info(
        "run %s: %d users in %.1fs (backend %s)",
        config.config_type,
        users_evaluated,
        report.wall_clock_s,
        model.backend,
    )
    return report


# ---------------------------------------------------------------------------
# Report CSV, sweeps, configuration comparison
# ---------------------------------------------------------------------------


def write_report_csv(reports, path) -> None:
    """One row per report; excludes wall-clock so bytes are stable."""
    if isinstance(reports, RunReport):
        reports = [reports]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.row())


def read_report_csv(path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class SweepResult:
    axis: str
    value: object
    report: RunReport | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.report is None


SWEEP_AXES = ("max_n", "dim", "mode")


def sweep(
    base: EvalConfig, axis: str, values, split: EvalSplit, backend=None
) -> list[SweepResult]:
    """One run per value along one hyperparameter axis.

    A value that fails validation (or a run that dies) is recorded as
    failed and the sweep continues.
    """
    if axis not in SWEEP_AXES:
        raise SeqRecError("sweep axis must be one of %s" % (SWEEP_AXES,))
    results: list[SweepResult] = []
    for value in values:
        try:
            cfg = EvalConfig(**{**_config_dict(base), axis: value})
            report = run(cfg, split, backend=backend)
            results.append(SweepResult(axis=axis, value=value, report=report))
        except (SeqRecError, TypeError, ValueError) as exc:
            logger.warning("sweep %s=%r failed: %s", axis, value, exc)
            results.append(
                SweepResult(axis=axis, value=value, report=None, error=str(exc))
            )
    return results


def _config_dict(config: EvalConfig) -> dict:
    return {name: getattr(config, name) for name in _CONFIG_COLUMNS}


def write_sweep_csv(results: list[SweepResult], path) -> None:
    columns = ("axis", "value", "status") + REPORT_COLUMNS
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for res in results:
            row = {"axis": res.axis, "value": repr(res.value)}
            if res.report is None:
                row["status"] = "failed: %s" % (res.error,)
            else:
                row["status"] = "ok"
                row.update(res.report.row())
            writer.writerow(row)


def compare_rows(rows: list[dict[str, str]]) -> list[dict[str, str]]:
    """Pairwise metric deltas between report rows (as read from CSV).

    Output rows carry (config_a, config_b, metric, a, b, delta) for
    every ordered pair a-before-b; the I/II pair is annotated since it
    isolates the cold-start effect. Floats use repr and round-trip
    through the CSV.
    """
    out: list[dict[str, str]] = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            ra, rb = rows[i], rows[j]
            pair = {ra["config_type"], rb["config_type"]}
            note = "cold_start_contrast" if pair == {"I", "II"} else ""
            for col in _SCORE_COLUMNS:
                a = float(ra[col])
                b = float(rb[col])
                out.append(
                    {
                        "config_a": ra["config_type"],
                        "config_b": rb["config_type"],
                        "metric": col,
                        "a": repr(a),
                        "b": repr(b),
                        "delta": repr(b - a),
                        "note": note,
                    }
                )
    return out


def compare_configs(reports: list[RunReport]) -> list[dict[str, str]]:
    """compare_rows over in-memory reports."""
    return compare_rows([r.row() for r in reports])


def write_compare_csv(rows: list[dict[str, str]], path) -> None:
    columns = ("config_a", "config_b", "metric", "a", "b", "delta", "note")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_compare_csv(path) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
