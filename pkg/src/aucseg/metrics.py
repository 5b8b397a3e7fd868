"""Classifier evaluation metrics: AUC-ROC, ROC curves, losses, correlation.

AUC is defined over positive/negative pairs: a pair is correctly ordered
when the positive scores strictly higher than the negative, ties count
half. The implementation uses midranks so runtime is O(N log N), but the
pair definition is the contract every other module builds on.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateLabels, LengthMismatch, ZeroVariance


def _check_binary(labels):
    labels = np.asarray(labels)
    p = int(np.count_nonzero(labels == 1))
    n = int(labels.size - p)
    if p == 0 or n == 0:
        raise DegenerateLabels(p, n)
    return p, n


def auc(labels, scores):
    """AUC-ROC: fraction of positive/negative pairs ordered correctly.

    Equivalent to the rank-sum statistic: with midranks r_i assigned over
    the pooled scores, AUC = (sum of positive ranks - p(p+1)/2) / (p n).
    Ties between a positive and a negative contribute half a pair.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise LengthMismatch(f"{labels.size} labels vs {scores.size} scores")
    p, n = _check_binary(labels)
    order = np.sort(scores, kind="stable")
    lo = np.searchsorted(order, scores, side="left")
    hi = np.searchsorted(order, scores, side="right")
    midranks = (lo + hi + 1) / 2.0
    rank_sum = float(midranks[labels == 1].sum())
    return (rank_sum - p * (p + 1) / 2.0) / (p * n)


class RocCurve:
    """Operating points of a scored classifier, sorted by threshold.

    ``fpr`` and ``tpr`` start at (0, 0) and end at (1, 1); ``thresholds``
    holds the score at which each intermediate point activates (the first
    entry is +inf: nothing predicted positive).
    """

    def __init__(self, fpr, tpr, thresholds):
        self.fpr = np.asarray(fpr, dtype=np.float64)
        self.tpr = np.asarray(tpr, dtype=np.float64)
        self.thresholds = np.asarray(thresholds, dtype=np.float64)

    @property
    def area(self):
        """Trapezoidal area under the curve; equals pairwise AUC."""
        trapezoid = getattr(np, "trapezoid", None) or np.trapz
        return float(trapezoid(self.tpr, self.fpr))


def roc_curve(labels, scores):
    """ROC operating points at every distinct score threshold."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise LengthMismatch(f"{labels.size} labels vs {scores.size} scores")
    p, n = _check_binary(labels)

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels == 0)
    # keep only the last point of each tied-score run
    boundary = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    tp = tp[boundary]
    fp = fp[boundary]
    thresholds = np.r_[np.inf, sorted_scores[boundary]]
    tpr = np.r_[0.0, tp / p]
    fpr = np.r_[0.0, fp / n]
    return RocCurve(fpr, tpr, thresholds)


def ce_loss(labels, scores):
    """Per-example cross-entropy loss, clamped away from log(0).

    Scores are clipped to [1e-15, 1 - 1e-15] so extreme probabilities
    yield large finite losses rather than infinities.
    """
    labels = np.asarray(labels, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise LengthMismatch(f"{labels.size} labels vs {scores.size} scores")
    clipped = np.clip(scores, 1e-15, 1.0 - 1e-15)
    return -(labels * np.log(clipped) + (1.0 - labels) * np.log1p(-clipped))


def gini_impurity(labels, scores):
    """Per-example impurity 1 - p(true label): score distance from the label."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise LengthMismatch(f"{labels.size} labels vs {scores.size} scores")
    return np.where(labels == 1, 1.0 - scores, scores)


def pearson_correlation(x, y):
    """Pearson correlation coefficient of two equal-length sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    if x.size < 2:
        raise ZeroVariance()
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance()
    return float((dx * dy).sum() / (sx * sy))


def metrics_report(dataset, slice_by=None):
    """Evaluation summary per model, optionally broken out by a feature.

    Returns a dict with record counts and, per model, overall AUC and
    mean losses; with ``slice_by`` (a categorical feature) a per-category
    section is added where each category reports its within-slice AUC
    (pairs with both members inside the category). Categories where AUC
    is undefined (no positives or no negatives) report None.
    """
    from .features import categories_of  # local import to avoid a cycle

    report = {
        "count": dataset.count,
        "positives": dataset.p,
        "negatives": dataset.n,
        "models": {},
    }
    for model in dataset.schema.model_names:
        scores = dataset.scores[model]
        report["models"][model] = {
            "auc": auc(dataset.labels, scores),
            "mean_ce_loss": float(ce_loss(dataset.labels, scores).mean()),
            "mean_gini": float(gini_impurity(dataset.labels, scores).mean()),
        }

    if slice_by is not None:
        values, categories = categories_of(dataset, slice_by)
        slices = {}
        for category in categories:
            mask = values == category
            labels = dataset.labels[mask]
            entry = {
                "count": int(mask.sum()),
                "positives": int(np.count_nonzero(labels == 1)),
                "negatives": int(np.count_nonzero(labels == 0)),
                "models": {},
            }
            for model in dataset.schema.model_names:
                scores = dataset.scores[model][mask]
                try:
                    entry["models"][model] = {"auc": auc(labels, scores)}
                except DegenerateLabels:
                    entry["models"][model] = {"auc": None}
            slices[category] = entry
        report["slice_feature"] = slice_by
        report["slices"] = slices
    return report
