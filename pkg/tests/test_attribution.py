import numpy as np
import pytest

from aucseg import (
    DegenerateLabels,
    EvalDataset,
    ZeroVariance,
    attribution_correlation_report,
    auc,
    example_attributions,
    normalized_attributions,
    pair_attributions,
)
from aucseg.attribution import pair_credit_matrix

from oracles import brute_example_totals, brute_pair_credits


class TestPairAttributions:
    def test_toy_pairs(self, toy):
        pairs = pair_attributions(toy, "model")
        assert len(pairs) == 9
        credits = {(p.pos_index, p.neg_index): p.credit for p in pairs}
        assert sum(credits.values()) == 8.0
        # the one misordered pair: positive record index 3 vs negative index 2
        assert credits[(3, 2)] == 0.0
        assert all(c == 1.0 for key, c in credits.items() if key != (3, 2))

    def test_tie_pair(self):
        d = EvalDataset.from_columns([1, 0], {"m": [0.5, 0.5]})
        pairs = pair_attributions(d, "m")
        assert len(pairs) == 1
        assert pairs[0].credit == 0.5

    def test_sum_matches_auc(self, random_suite):
        for d in random_suite[:50]:
            pairs = pair_attributions(d, "m")
            total = sum(p.credit for p in pairs)
            assert abs(total - d.p * d.n * auc(d.labels, d.score_for("m"))) < 1e-9

    def test_matches_brute_force(self, random_suite):
        for d in random_suite[:25]:
            fast = {(p.pos_index, p.neg_index): p.credit
                    for p in pair_attributions(d, "m")}
            slow = brute_pair_credits(d.labels.tolist(), d.score_for("m").tolist())
            assert fast == slow

    def test_matrix_agrees_with_list(self, random_suite):
        for d in random_suite[:25]:
            credits, pos, neg = pair_credit_matrix(d, "m")
            listed = pair_attributions(d, "m")
            assert len(listed) == credits.size
            for pair in listed:
                i = int(np.searchsorted(pos, pair.pos_index))
                j = int(np.searchsorted(neg, pair.neg_index))
                assert credits[i, j] == pair.credit

    def test_sampling_is_deterministic_and_bounded(self):
        rng = np.random.default_rng(11)
        labels = rng.integers(0, 2, 80)
        labels[:2] = [0, 1]
        d = EvalDataset.from_columns(labels, {"m": rng.integers(0, 11, 80) / 10})
        one = pair_attributions(d, "m", max_pos=5, max_neg=7, seed=3)
        two = pair_attributions(d, "m", max_pos=5, max_neg=7, seed=3)
        assert one == two
        assert len(one) == 5 * 7
        other = pair_attributions(d, "m", max_pos=5, max_neg=7, seed=4)
        assert {p.pos_index for p in one} != {p.pos_index for p in other} or one != other

    def test_sampled_credits_match_subset_auc(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            labels = rng.integers(0, 2, 60)
            labels[:2] = [0, 1]
            d = EvalDataset.from_columns(labels, {"m": rng.integers(0, 21, 60) / 20})
            pairs = pair_attributions(d, "m", max_pos=4, max_neg=4,
                                      seed=int(rng.integers(1000)))
            rows = sorted({p.pos_index for p in pairs} | {p.neg_index for p in pairs})
            sub = d.subset(rows)
            mean = sum(p.credit for p in pairs) / len(pairs)
            assert abs(mean - auc(sub.labels, sub.score_for("m"))) < 1e-12

    def test_degenerate(self):
        d = EvalDataset.from_columns([1, 1], {"m": [0.5, 0.6]})
        with pytest.raises(DegenerateLabels):
            pair_attributions(d, "m")


class TestExampleAttributions:
    def test_toy_totals(self, toy):
        totals = example_attributions(toy, "model")
        assert abs(totals[1] - 1.5) < 1e-12   # record 2
        assert abs(totals[3] - 1.0) < 1e-12   # record 4
        assert abs(totals.sum() - 8.0) < 1e-12

    def test_toy_normalized(self, toy):
        norm = normalized_attributions(toy, "model")
        assert abs(norm[1] - 0.5) < 1e-12
        assert abs(norm[3] - 1 / 3) < 1e-12

    def test_matches_brute_force_elementwise(self, random_suite):
        for d in random_suite[:50]:
            fast = example_attributions(d, "m")
            slow = brute_example_totals(d.labels.tolist(), d.score_for("m").tolist())
            np.testing.assert_allclose(fast, slow, atol=1e-12)

    def test_conservation(self, random_suite):
        for d in random_suite[:100]:
            totals = example_attributions(d, "m")
            expected = d.p * d.n * auc(d.labels, d.score_for("m"))
            assert abs(totals.sum() - expected) < 1e-9

    def test_normalized_bounds(self, random_suite):
        for d in random_suite[:100]:
            norm = normalized_attributions(d, "m")
            assert (norm >= 0).all()
            assert (norm <= 0.5 + 1e-15).all()

    def test_order_equivariance(self):
        rng = np.random.default_rng(9)
        labels = rng.integers(0, 2, 50)
        labels[:2] = [0, 1]
        scores = rng.integers(0, 21, 50) / 20
        d = EvalDataset.from_columns(labels, {"m": scores})
        base = example_attributions(d, "m")
        perm = rng.permutation(50)
        shuffled = example_attributions(d.subset(perm), "m")
        np.testing.assert_array_equal(shuffled, base[perm])

    def test_half_credit_per_win_quarter_per_tie(self):
        # one positive tied with one negative, beating another negative
        d = EvalDataset.from_columns([1, 0, 0], {"m": [0.5, 0.5, 0.2]})
        totals = example_attributions(d, "m")
        assert totals[0] == 0.25 + 0.5
        assert totals[1] == 0.25
        assert totals[2] == 0.5


class TestCorrelationReport:
    def test_toy_is_finite_2x2(self, toy):
        report = attribution_correlation_report(toy, "model")
        assert set(report) == {"total", "normalized"}
        for variant in report.values():
            assert set(variant) == {"ce_loss", "gini_impurity"}
            for value in variant.values():
                assert np.isfinite(value)

    def test_calibrated_scores_correlate_negatively(self):
        rng = np.random.default_rng(4)
        scores = rng.uniform(0.02, 0.98, 1500)
        labels = (rng.random(1500) < scores).astype(int)
        d = EvalDataset.from_columns(labels, {"m": scores})
        report = attribution_correlation_report(d, "m")
        assert report["normalized"]["ce_loss"] < 0

    def test_constant_scores_raise(self):
        d = EvalDataset.from_columns([1, 0, 1, 0], {"m": [0.5] * 4})
        with pytest.raises(ZeroVariance):
            attribution_correlation_report(d, "m")
