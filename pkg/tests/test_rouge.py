"""Overlap metrics: clipped n-gram counts, LCS scores, baselines."""

import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqrec.errors import SeqRecError
from seqrec.rouge import (
    EvalInstance,
    baseline_scores,
    lcs_length,
    make_instance,
    rouge_l,
    rouge_n,
    score_list,
)

A, B, C, D, E, X, Y, Z = "ABCDEXYZ"


def lcs_brute(a, b):
    """Textbook exponential recursion, independent of the DP kernel."""
    if not a or not b:
        return 0
    if a[-1] == b[-1]:
        return 1 + lcs_brute(a[:-1], b[:-1])
    return max(lcs_brute(a[:-1], b), lcs_brute(a, b[:-1]))


items_st = st.lists(st.sampled_from("abc"), min_size=1, max_size=8)


class TestRougeN:
    def test_worked_example_bigram(self):
        # ref ABCDE vs sys XABCYZ: bigram matches are AB and BC
        inst = make_instance([(A, B, C, D, E)], (X, A, B, C, Y, Z))
        got = rouge_n(inst, 2)
        assert got.precision == pytest.approx(2 / 5)
        assert got.recall == pytest.approx(2 / 4)
        assert got.f_measure == pytest.approx(4 / 9)
        assert got.clamp_events == 0

    def test_adjacent_swap_breaks_bigrams(self):
        inst = make_instance([(A, B, C, D, E)], (A, C, B, D, E))
        got = rouge_n(inst, 2)
        assert got.precision == pytest.approx(0.25)
        assert got.recall == pytest.approx(0.25)

    def test_identical_sequences_score_one(self):
        inst = make_instance([(A, B, C)], (A, B, C))
        for n in (1, 2, 3):
            got = rouge_n(inst, n)
            assert (got.precision, got.recall, got.f_measure) == (1.0, 1.0, 1.0)

    def test_counts_are_clipped(self):
        # sys repeats A three times but the reference has only two
        inst = make_instance([(A, A, B)], (A, A, A))
        got = rouge_n(inst, 1)
        assert got.precision == pytest.approx(2 / 3)
        assert got.recall == pytest.approx(2 / 3)

    def test_multi_reference_sums_matches_and_totals(self):
        inst = make_instance([(A, B), (C, D)], (A, B, C, D))
        got = rouge_n(inst, 1)
        assert got.precision == 1.0
        assert got.recall == 1.0

    def test_precision_clamped_with_warning(self, caplog):
        # duplicated references double the match total
        inst = make_instance([(A, B), (A, B)], (A, B))
        with caplog.at_level(logging.WARNING, logger="seqrec.rouge"):
            got = rouge_n(inst, 1)
        assert got.precision == 1.0
        assert got.recall == 1.0
        assert got.clamp_events == 1
        assert any("clamped" in r.message for r in caplog.records)

    def test_shorter_than_n_has_no_grams(self):
        inst = make_instance([(A,)], (A,))
        got = rouge_n(inst, 2)
        assert (got.precision, got.recall, got.f_measure) == (0.0, 0.0, 0.0)
        assert got.clamp_events == 0

    def test_n_must_be_positive(self):
        inst = make_instance([(A,)], (A,))
        with pytest.raises(SeqRecError):
            rouge_n(inst, 0)

    @given(items=items_st)
    @settings(max_examples=60, deadline=None)
    def test_identity_property(self, items):
        inst = make_instance([items], items)
        for n in range(1, len(items) + 1):
            got = rouge_n(inst, n)
            assert got.precision == 1.0
            assert got.recall == 1.0
            assert got.f_measure == 1.0


class TestLcs:
    def test_known_cases(self):
        assert lcs_length("ABCBDAB", "BDCABA") == 4
        assert lcs_length((A, B, C), (A, B, C)) == 3
        assert lcs_length((A, B, C), (C, B, A)) == 1
        assert lcs_length((A,), (B,)) == 0
        assert lcs_length((), (A, B)) == 0

    def test_matches_exponential_brute_force(self, rng):
        for _ in range(200):
            la, lb = rng.integers(0, 9, size=2)
            a = tuple(rng.choice(list("abc"), size=la))
            b = tuple(rng.choice(list("abc"), size=lb))
            assert lcs_length(a, b) == lcs_brute(a, b)

    @given(a=items_st, b=items_st, extra=st.sampled_from("abc"))
    @settings(max_examples=60, deadline=None)
    def test_appending_never_decreases(self, a, b, extra):
        assert lcs_length(a, b + [extra]) >= lcs_length(a, b)


class TestRougeL:
    def test_worked_example(self):
        inst = make_instance([(A, B, C, D, E)], (X, A, B, C, Y, Z))
        got = rouge_l(inst)
        assert got.precision == pytest.approx(3 / 6)
        assert got.recall == pytest.approx(3 / 5)
        assert got.f_measure == pytest.approx(6 / 11)

    def test_multi_reference_trace(self):
        inst = make_instance([(A, B), (C, D)], (A, B, C, D))
        got = rouge_l(inst)
        assert got.precision == 1.0
        assert got.recall == 1.0

    def test_precision_clamped_when_references_pile_up(self, caplog):
        inst = make_instance([(A, B), (A, B)], (A, B))
        with caplog.at_level(logging.WARNING, logger="seqrec.rouge"):
            got = rouge_l(inst)
        assert got.precision == 1.0
        assert got.clamp_events == 1

    def test_reversal_keeps_partial_credit(self):
        inst = make_instance([(A, B, C)], (C, B, A))
        assert rouge_n(inst, 2).recall == 0.0
        got = rouge_l(inst)
        assert got.precision == pytest.approx(1 / 3)
        assert got.recall == pytest.approx(1 / 3)

    @given(items=items_st)
    @settings(max_examples=60, deadline=None)
    def test_identity_property(self, items):
        got = rouge_l(make_instance([items], items))
        assert (got.precision, got.recall, got.f_measure) == (1.0, 1.0, 1.0)


class TestBaselines:
    def test_reluctant_ignores_order_strict_does_not(self):
        inst = make_instance([(A, B, C)], (C, A, B))
        reluctant, strict = baseline_scores(inst)
        assert (reluctant.precision, reluctant.recall) == (1.0, 1.0)
        assert (strict.precision, strict.recall, strict.f_measure) == (0.0, 0.0, 0.0)

    def test_strict_hits_on_exact_match_with_any_reference(self):
        inst = make_instance([(A, B), (C, D)], (C, D))
        _, strict = baseline_scores(inst)
        assert strict.f_measure == 1.0

    def test_reluctant_counts_distinct_items(self):
        # repeats collapse: sys {A}, ref {A, B}
        inst = make_instance([(A, B)], (A, A, A))
        reluctant, _ = baseline_scores(inst)
        assert reluctant.precision == 1.0
        assert reluctant.recall == pytest.approx(0.5)

    def test_order_sensitivity_bracket(self):
        # same item multiset, different order: reluctant ceiling stays
        # at 1 while the bigram metric drops
        inst = make_instance([(A, B, C, D)], (B, A, D, C))
        reluctant, _ = baseline_scores(inst)
        assert reluctant.f_measure == 1.0
        assert rouge_n(inst, 2).f_measure < 1.0


class TestInstances:
    def test_empty_references_rejected(self):
        with pytest.raises(SeqRecError):
            make_instance([], (A,))

    def test_empty_reference_member_rejected(self):
        with pytest.raises(SeqRecError):
            make_instance([(A,), ()], (A,))

    def test_empty_system_rejected(self):
        with pytest.raises(SeqRecError):
            make_instance([(A,)], ())

    def test_frozen(self):
        inst = make_instance([(A,)], (A,))
        with pytest.raises(AttributeError):
            inst.system = (B,)


class TestScoreList:
    def test_best_match_takes_elementwise_max(self):
        # one entry wins on precision, the other on recall
        refs = [(A, B, C, D)]
        recommended = [(A,), (A, B, C, D, X, Y, Z, "W")]
        got = score_list(refs, recommended, metrics=("rouge_1",))["rouge_1"]
        assert got.precision == 1.0
        assert got.recall == 1.0
        assert got.f_measure == pytest.approx(2 / 3)

    def test_empty_list_scores_zero(self):
        got = score_list([(A, B)], [])
        for metric in ("rouge_1", "rouge_2", "rouge_l"):
            score = got[metric]
            assert (score.precision, score.recall, score.f_measure) == (
                0.0,
                0.0,
                0.0,
            )

    def test_accepts_ranked_pairs_and_plain_sequences(self):
        from seqrec.recindex import RecommendationList
        from seqrec.subseq import serialize

        refs = [(A, B, C)]
        plain = score_list(refs, [(A, B, C), (X, Y)])
        ranked = RecommendationList(
            query=serialize((A,)),
            ranked=[(serialize((A, B, C)), 0.9), (serialize((X, Y)), 0.1)],
        )
        wrapped = score_list(refs, ranked)
        for metric, score in plain.items():
            assert score == wrapped[metric]

    def test_clamp_events_accumulate(self):
        refs = [(A, B), (A, B)]
        got = score_list(refs, [(A, B)], metrics=("rouge_1",))["rouge_1"]
        assert got.clamp_events >= 1

    def test_default_metrics(self):
        got = score_list([(A, B)], [(A, B)])
        assert set(got) == {"rouge_1", "rouge_2", "rouge_l"}

    def test_needs_references(self):
        with pytest.raises(SeqRecError):
            score_list([], [(A,)])

    def test_unknown_metric_rejected(self):
        with pytest.raises(SeqRecError):
            score_list([(A,)], [(A,)], metrics=("bleu",))
        with pytest.raises(SeqRecError):
            score_list([(A,)], [(A,)], metrics=("rouge_x",))
