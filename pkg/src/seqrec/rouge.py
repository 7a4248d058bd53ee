"""ROUGE-style overlap metrics for recommended item sequences.

ROUGE-N counts clipped n-gram co-occurrences: recall divides the
summed matches by the total reference gram count, precision by the
system gram count. ROUGE-L uses longest-common-subsequence lengths,
summed over references for recall and divided by the system length
for precision. F is the harmonic mean (0 when degenerate). Scores are
clamped into [0, 1]; a clamp is counted and logged, never hidden.

Two baselines bracket the order sensitivity: `reluctant` ignores order
entirely (set overlap of items), `strict` scores 1 only on an exact
sequence match.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence as TSeq

import numpy as np

from . import kernels
from .errors import SeqRecError

logger = logging.getLogger(__name__)

METRIC_ROUGE_L = "rouge_l"
METRIC_RELUCTANT = "reluctant"
METRIC_STRICT = "strict"


@dataclass
class RougeScore:
    precision: float
    recall: float
    f_measure: float
    metric: str
    clamp_events: int = 0


@dataclass(frozen=True)
class EvalInstance:
    """References (a user's held-out sequences) and one system sequence."""

    references: tuple[tuple[str, ...], ...]
    system: tuple[str, ...]

    def __post_init__(self):
        if not self.references or any(not r for r in self.references):
            raise SeqRecError("references must be non-empty sequences")
        if not self.system:
            raise SeqRecError("system sequence must be non-empty")


def make_instance(references: Iterable[TSeq[str]], system: TSeq[str]) -> EvalInstance:
    return EvalInstance(
        references=tuple(tuple(r) for r in references), system=tuple(system)
    )


def _f_measure(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0


def _clamp(value: float, what: str) -> tuple[float, int]:
    if value > 1.0:
        logger.warning("%s exceeded 1 (%.4f); clamped", what, value)
        return 1.0, 1
    return value, 0


def _ngram_counts(items: TSeq[str], n: int) -> Counter:
    return Counter(tuple(items[i : i + n]) for i in range(len(items) - n + 1))


def rouge_n(inst: EvalInstance, n: int) -> RougeScore:
    """Clipped n-gram overlap across all references.

    match(r) = sum over grams of min(count in r, count in system);
    recall = sum match(r) / sum |grams(r)|, precision = sum match(r) /
    |grams(system)|. Sequences shorter than n contribute no grams.
    """
    if n < 1:
        raise SeqRecError("n must be >= 1")
    sys_counts = _ngram_counts(inst.system, n)
    sys_total = sum(sys_counts.values())
    match_total = 0
    ref_total = 0
    for ref in inst.references:
        ref_counts = _ngram_counts(ref, n)
        ref_total += sum(ref_counts.values())
        match_total += sum((ref_counts & sys_counts).values())
    recall = match_total / ref_total if ref_total else 0.0
    precision = match_total / sys_total if sys_total else 0.0
    clamps = 0
    precision, c = _clamp(precision, "rouge_%d precision" % n)
    clamps += c
    recall, c = _clamp(recall, "rouge_%d recall" % n)
    clamps += c
    return RougeScore(
        precision=precision,
        recall=recall,
        f_measure=_f_measure(precision, recall),
        metric="rouge_%d" % n,
        clamp_events=clamps,
    )


def lcs_length(a: TSeq, b: TSeq) -> int:
    """Longest common subsequence length of two item sequences."""
    if not len(a) or not len(b):
        return 0
    codes: dict = {}
    for it in a:
        codes.setdefault(it, len(codes))
    for it in b:
        codes.setdefault(it, len(codes))
    xa = np.asarray([codes[it] for it in a], dtype=np.int32)
    xb = np.asarray([codes[it] for it in b], dtype=np.int32)
    return int(kernels.lcs_length_i32(xa, xb))


def rouge_l(inst: EvalInstance) -> RougeScore:
    """LCS-based overlap: recall sums LCS lengths over references and
    divides by total reference length; precision divides the same sum
    by the system length (clamped when several references share it)."""
    lcs_total = sum(lcs_length(ref, inst.system) for ref in inst.references)
    ref_total = sum(len(ref) for ref in inst.references)
    recall = lcs_total / ref_total if ref_total else 0.0
    precision = lcs_total / len(inst.system)
    clamps = 0
    precision, c = _clamp(precision, "rouge_l precision")
    clamps += c
    recall, c = _clamp(recall, "rouge_l recall")
    clamps += c
    return RougeScore(
        precision=precision,
        recall=recall,
        f_measure=_f_measure(precision, recall),
        metric=METRIC_ROUGE_L,
        clamp_events=clamps,
    )


def baseline_scores(inst: EvalInstance) -> tuple[RougeScore, RougeScore]:
    """(reluctant, strict) baselines.

    reluctant ignores order: per reference, matches are the distinct
    items shared with the system; recall sums over references like the
    gram metrics, precision divides by the distinct system items.
    strict is exact equality with any reference.
    """
    sys_set = set(inst.system)
    match_total = 0
    ref_total = 0
    for ref in inst.references:
        ref_set = set(ref)
        match_total += len(ref_set & sys_set)
        ref_total += len(ref_set)
    recall = match_total / ref_total if ref_total else 0.0
    precision = match_total / len(sys_set)
    clamps = 0
    precision, c = _clamp(precision, "reluctant precision")
    clamps += c
    reluctant = RougeScore(
        precision=precision,
        recall=recall,
        f_measure=_f_measure(precision, recall),
        metric=METRIC_RELUCTANT,
        clamp_events=clamps,
    )
    hit = 1.0 if any(inst.system == ref for ref in inst.references) else 0.0
    strict = RougeScore(
        precision=hit, recall=hit, f_measure=hit, metric=METRIC_STRICT
    )
    return reluctant, strict


def _one_metric(inst: EvalInstance, metric: str) -> RougeScore:
    if metric == METRIC_ROUGE_L:
        return rouge_l(inst)
    if metric == METRIC_RELUCTANT:
        return baseline_scores(inst)[0]
    if metric == METRIC_STRICT:
        return baseline_scores(inst)[1]
    if metric.startswith("rouge_"):
        try:
            n = int(metric.split("_", 1)[1])
        except ValueError:
            raise SeqRecError("unknown metric %r" % (metric,)) from None
        return rouge_n(inst, n)
    raise SeqRecError("unknown metric %r" % (metric,))


def score_list(
    references: Iterable[TSeq[str]],
    recommended,
    metrics: Iterable[str] = ("rouge_1", "rouge_2", METRIC_ROUGE_L),
) -> dict[str, RougeScore]:
    """Best-match scores of a recommendation list.

    Per metric, precision, recall and F are each the elementwise max
    over the recommended sequences (so the triple may come from
    different list entries and is reported as-is). An empty list
    scores zero on everything.
    """
    refs = tuple(tuple(r) for r in references)
    if not refs:
        raise SeqRecError("score_list needs at least one reference")
    ranked = getattr(recommended, "ranked", recommended)
    systems = []
    for entry in ranked:
        # a ranked (token, score) pair has a numeric second element;
        # an item tuple never does, item ids are strings
        if (
            isinstance(entry, tuple)
            and len(entry) == 2
            and isinstance(entry[1], (int, float))
        ):
            entry = entry[0]
        systems.append(tuple(getattr(entry, "items", entry)))
    out: dict[str, RougeScore] = {}
    for metric in metrics:
        best = RougeScore(0.0, 0.0, 0.0, metric=metric)
        for system in systems:
            score = _one_metric(make_instance(refs, system), metric)
            best = RougeScore(
                precision=max(best.precision, score.precision),
                recall=max(best.recall, score.recall),
                f_measure=max(best.f_measure, score.f_measure),
                metric=metric,
                clamp_events=best.clamp_events + score.clamp_events,
            )
        out[metric] = best
    return out
