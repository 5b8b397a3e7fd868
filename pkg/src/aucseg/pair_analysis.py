"""Pair-level views of ranking quality: pair datasets, cross matrices,
and decision-boundary segmentation.

A pair couples one positive and one negative record. Aggregating pair
credits over the Cartesian product of a partition's categories shows
which (positive category, negative category) crosses the model orders
well; counting the misordered pairs per cross shows where the remaining
headroom is concentrated. Fitting a tree on pair credits over paired
features characterizes the decision boundary itself.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .attribution import _sample, _split_by_label
from .dataset import NUMERIC, split_indices
from .errors import NonCategoricalFeature
from .features import FeatureColumn, FeatureMatrix, bin_numeric, categories_of
from .formatting import sig3
from .segmentation import (
    SegmentationResult,
    TreeParams,
    describe_path,
    fit_tree,
    honest_estimate,
)

POS_SUFFIX = "_pos"
NEG_SUFFIX = "_neg"

MEAN_KIND = "mean_pair_attribution"
HEADROOM_KIND = "incorrect_pair_count"
_KIND_ALIASES = {
    "mean": MEAN_KIND,
    MEAN_KIND: MEAN_KIND,
    "headroom": HEADROOM_KIND,
    HEADROOM_KIND: HEADROOM_KIND,
}


@dataclass(frozen=True)
class PairDataset:
    """Positive/negative record pairs with credits and paired features.

    ``features`` holds two columns per base feature, the positive
    member's value (suffix ``_pos``) and the negative member's value
    (suffix ``_neg``), aligned with the credit array.
    """

    model: str
    pos_index: np.ndarray
    neg_index: np.ndarray
    credit: np.ndarray
    features: FeatureMatrix

    @property
    def count(self):
        return int(self.credit.size)

    @property
    def mean_credit(self):
        return float(self.credit.mean())


def build_pair_dataset(dataset, model, max_pos=None, max_neg=None, seed=0,
                       dims=None):
    """Materialize the (sampled) Cartesian product of positives × negatives.

    Both sides are subsampled without replacement when a cap is given;
    the full cross product of the sampled indices is then built, with
    positives as the outer loop. Deterministic for a fixed seed.
    """
    scores, pos, neg = _split_by_label(dataset, model)
    rng = np.random.default_rng(seed)
    pos = _sample(pos, max_pos, rng)
    neg = _sample(neg, max_neg, rng)

    pos_rep = np.repeat(pos, neg.size)
    neg_rep = np.tile(neg, pos.size)
    ps = scores[pos_rep]
    ns = scores[neg_rep]
    credit = np.where(ps > ns, 1.0, np.where(ps == ns, 0.5, 0.0))

    if dims is None:
        dims = dataset.schema.feature_names
    columns = []
    for name in dims:
        kind = dataset.feature_kind(name)
        values = dataset.feature_values(name)
        columns.append(FeatureColumn(name + POS_SUFFIX, kind, values[pos_rep]))
        columns.append(FeatureColumn(name + NEG_SUFFIX, kind, values[neg_rep]))
    features = FeatureMatrix(columns, count=credit.size)
    return PairDataset(
        model=model, pos_index=pos_rep, neg_index=neg_rep, credit=credit,
        features=features,
    )


@dataclass(frozen=True)
class CrossMatrix:
    """Per-cross pair statistic over one partition of the records.

    Rows index the positive member's category, columns the negative
    member's. ``values`` holds NaN where a cross contains no pairs.
    """

    model: str
    feature: str
    kind: str
    categories: tuple
    values: np.ndarray
    pair_counts: np.ndarray
    pos_counts: np.ndarray
    neg_counts: np.ndarray

    @property
    def total(self):
        """Sum over non-empty cells."""
        return float(np.nansum(self.values))

    def to_json_dict(self):
        return {
            "model": self.model,
            "feature": self.feature,
            "kind": self.kind,
            "categories": list(self.categories),
            "values": [
                [None if math.isnan(v) else float(v) for v in row]
                for row in self.values
            ],
            "pair_counts": [[int(c) for c in row] for row in self.pair_counts],
            "positive_counts": [int(c) for c in self.pos_counts],
            "negative_counts": [int(c) for c in self.neg_counts],
        }

    def to_csv(self):
        """Matrix as CSV text: rows = positive category, cols = negative."""
        import csv
        import io

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["positive\\negative"] + list(self.categories))
        for category, row in zip(self.categories, self.values):
            cells = ["" if math.isnan(v) else repr(float(v)) for v in row]
            writer.writerow([category] + cells)
        return buffer.getvalue()

    def to_svg(self, title=None):
        from .heatmap import heatmap_svg

        if title is None:
            label = "mean pair attribution" if self.kind == MEAN_KIND \
                else "misordered pairs"
            title = f"{label}: {self.feature} ({self.model})"
        return heatmap_svg(
            self.values, self.categories, self.categories,
            row_axis="positive example", col_axis="negative example",
            title=title,
        )


def _partition_tokens(dataset, feature, bins):
    kind = dataset.feature_kind(feature)
    if kind == NUMERIC:
        if bins is None:
            raise NonCategoricalFeature(feature)
        return bin_numeric(dataset.feature_values(feature), bins)
    return categories_of(dataset, feature)


def cross_matrix(dataset, model, feature, kind=MEAN_KIND, bins=None, threads=1):
    """Aggregate pair credits over category crosses of one feature.

    ``kind`` is ``"mean"`` (mean pair credit per cross; the diagonal is
    each category's within-slice AUC) or ``"headroom"`` (count of
    misordered pairs per cross, ties counting half). Numeric features
    must be bucketed by passing ``bins``; crosses with no pairs are NaN.
    Cell order never depends on ``threads``.
    """
    canonical = _KIND_ALIASES.get(kind)
    if canonical is None:
        raise ValueError(f"kind must be one of {sorted(_KIND_ALIASES)}, got {kind!r}")
    scores, pos, neg = _split_by_label(dataset, model)
    tokens, categories = _partition_tokens(dataset, feature, bins)
    k = len(categories)

    pos_scores = []
    neg_sorted = []
    for category in categories:
        mask = tokens == category
        pos_scores.append(scores[pos[mask[pos]]])
        neg_sorted.append(np.sort(scores[neg[mask[neg]]], kind="stable"))
    pos_counts = np.array([s.size for s in pos_scores], dtype=np.int64)
    neg_counts = np.array([s.size for s in neg_sorted], dtype=np.int64)

    def fill_row(i):
        row = np.full(k, np.nan)
        p_i = pos_scores[i]
        if p_i.size == 0:
            return row
        for j in range(k):
            n_j = neg_sorted[j]
            if n_j.size == 0:
                continue
            lo = np.searchsorted(n_j, p_i, side="left").sum(dtype=np.float64)
            hi = np.searchsorted(n_j, p_i, side="right").sum(dtype=np.float64)
            correct = lo + 0.5 * (hi - lo)
            if canonical == MEAN_KIND:
                row[j] = correct / (p_i.size * n_j.size)
            else:
                row[j] = p_i.size * n_j.size - correct
        return row

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(fill_row, range(k)))
    else:
        rows = [fill_row(i) for i in range(k)]

    return CrossMatrix(
        model=model, feature=feature, kind=canonical, categories=tuple(categories),
        values=np.vstack(rows) if rows else np.zeros((0, 0)),
        pair_counts=np.outer(pos_counts, neg_counts),
        pos_counts=pos_counts, neg_counts=neg_counts,
    )


@dataclass(frozen=True)
class PairSegmentRow:
    """One decision-boundary segment: a pair-of-slices description."""

    leaf_id: int
    negative_slice: str
    positive_slice: str
    path: tuple
    fit_count: int
    est_count: int
    fit_mean: float
    honest_mean: float
    t_statistic: float
    p_value: float
    false_discovery: bool


@dataclass(frozen=True)
class PairSegmentReport:
    """Leaf table for a pair-credit tree, split by pair side."""

    target: dict
    rows: tuple
    fit_count: int
    est_count: int
    fit_mean: float
    est_mean: float

    def to_json_dict(self):
        rows = []
        for row in self.rows:
            path = [
                {
                    "feature": rule.feature,
                    "kind": "numeric_threshold" if rule.is_numeric
                            else "categorical_membership",
                    "threshold": rule.threshold,
                    "tokens": sorted(rule.tokens) if rule.tokens is not None else None,
                    "matches": went_left,
                }
                for rule, went_left in row.path
            ]
            rows.append({
                "leaf_id": row.leaf_id,
                "negative_slice": row.negative_slice,
                "positive_slice": row.positive_slice,
                "path": path,
                "fit_count": row.fit_count,
                "est_count": row.est_count,
                "fit_mean": row.fit_mean,
                "honest_mean": row.honest_mean,
                "t_statistic": row.t_statistic,
                "p_value": row.p_value,
                "false_discovery": row.false_discovery,
            })
        return {
            "target": self.target,
            "fit_count": self.fit_count,
            "est_count": self.est_count,
            "fit_mean": self.fit_mean,
            "est_mean": self.est_mean,
            "segments": rows,
        }

    def to_text(self):
        from .formatting import align_table

        lines = []
        for row in self.rows:
            value = sig3(row.honest_mean)
            if row.false_discovery:
                value += " *"
            lines.append([row.negative_slice, row.positive_slice,
                          str(row.est_count), value])
        table = align_table(
            lines, header=["Negative Slice", "Positive Slice", "Count",
                           "AUC Attribution"],
            right=(2, 3),
        )
        if any(row.false_discovery for row in self.rows):
            table += "\n* estimate does not replicate on the held-out half"
        return table


def _split_pair_path(path):
    """Separate a pair-tree path into negative-side and positive-side text."""
    neg_rules = []
    pos_rules = []
    for rule, went_left in path:
        if rule.feature.endswith(NEG_SUFFIX):
            base = rule.feature[: -len(NEG_SUFFIX)]
            neg_rules.append((replace(rule, feature=base), went_left))
        else:
            base = rule.feature[: -len(POS_SUFFIX)]
            pos_rules.append((replace(rule, feature=base), went_left))
    neg_text = describe_path(neg_rules) if neg_rules else "(any)"
    pos_text = describe_path(pos_rules) if pos_rules else "(any)"
    return neg_text, pos_text


def segment_pairs(dataset, model, dims=None, params=None, pair_budget=10000,
                  seed=0):
    """Characterize the decision boundary by segmenting pair credits.

    Samples roughly ``pair_budget`` pairs (√budget records per side),
    fits a tree over the paired ``_pos``/``_neg`` features on half the
    pairs and honest-estimates on the rest. Leaves with mean near 1 are
    pair types the model orders reliably; near 0, reliably backwards.
    """
    if params is None:
        params = TreeParams(min_leaf_size=1000)
    side = max(1, math.isqrt(pair_budget))
    if side * side < pair_budget:
        side += 1
    sample_seed, split_seed = np.random.SeedSequence(seed).spawn(2)
    pairs = build_pair_dataset(
        dataset, model, max_pos=side, max_neg=side, seed=sample_seed, dims=dims,
    )
    target = {"kind": "pair_credit", "model": model}
    fit_idx, est_idx = split_indices(pairs.count, params.fit_fraction, split_seed)
    tree = fit_tree(pairs.credit[fit_idx], pairs.features.subset(fit_idx),
                    params, target=target)
    tree = honest_estimate(tree, pairs.features.subset(est_idx),
                           pairs.credit[est_idx])

    leaves = tree.leaves()

    def sort_key(leaf):
        mean = leaf.honest_mean
        empty = 1 if (mean is None or math.isnan(mean)) else 0
        return (empty, -(mean if not empty else 0.0), leaf.leaf_id)

    rows = []
    for leaf in sorted(leaves, key=sort_key):
        neg_text, pos_text = _split_pair_path(leaf.path)
        rows.append(PairSegmentRow(
            leaf_id=leaf.leaf_id, negative_slice=neg_text, positive_slice=pos_text,
            path=leaf.path, fit_count=leaf.fit_count, est_count=leaf.est_count,
            fit_mean=leaf.fit_mean, honest_mean=leaf.honest_mean,
            t_statistic=leaf.t_statistic, p_value=leaf.p_value,
            false_discovery=leaf.false_discovery,
        ))
    fit_count = sum(leaf.fit_count for leaf in leaves)
    est_count = sum(leaf.est_count for leaf in leaves)
    fit_mean = sum(leaf.fit_mean * leaf.fit_count for leaf in leaves) / fit_count
    est_total = sum(
        leaf.honest_mean * leaf.est_count for leaf in leaves if leaf.est_count
    )
    est_mean = est_total / est_count if est_count else math.nan
    report = PairSegmentReport(
        target=target, rows=tuple(rows), fit_count=fit_count, est_count=est_count,
        fit_mean=fit_mean, est_mean=est_mean,
    )
    return SegmentationResult(tree, report)
