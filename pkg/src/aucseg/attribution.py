"""Attribution of AUC to individual examples and to positive/negative pairs.

Each (positive, negative) pair earns a credit: 1 when the positive
outranks the negative, 1/2 on a score tie, 0 otherwise. AUC is the mean
credit, so credits decompose the metric exactly. Per-example totals give
each member of a pair half of its credit; summed over all pairs this
conserves p*n*AUC, so example attributions are an exact decomposition
too, not an approximation.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateLabels


class PairCredit(NamedTuple):
    """One positive/negative pair and its ordering credit."""

    pos_index: int
    neg_index: int
    credit: float


def _split_by_label(dataset, model):
    scores = dataset.score_for(model)
    pos = dataset.positive_indices
    neg = dataset.negative_indices
    if pos.size == 0 or neg.size == 0:
        raise DegenerateLabels(pos.size, neg.size)
    return scores, pos, neg


def _sample(indices, limit, rng):
    if limit is None or limit >= indices.size:
        return indices
    return np.sort(rng.choice(indices, size=limit, replace=False))


def pair_attributions(dataset, model, max_pos=None, max_neg=None, seed=0):
    """Credits for every (positive, negative) pair, positives outermost.

    ``max_pos``/``max_neg`` subsample each side without replacement
    (seeded) when the full cross product would be too large. Pairs are
    emitted sorted by (pos_index, neg_index).
    """
    scores, pos, neg = _split_by_label(dataset, model)
    rng = np.random.default_rng(seed)
    pos = _sample(pos, max_pos, rng)
    neg = _sample(neg, max_neg, rng)
    pairs = []
    for i in pos:
        si = scores[i]
        for j in neg:
            sj = scores[j]
            credit = 1.0 if si > sj else (0.5 if si == sj else 0.0)
            pairs.append(PairCredit(int(i), int(j), credit))
    return pairs


def pair_credit_matrix(dataset, model):
    """Dense credit matrix, positives as rows and negatives as columns.

    Returns ``(credits, pos_indices, neg_indices)``. Vectorized; the
    matrix mean equals AUC.
    """
    scores, pos, neg = _split_by_label(dataset, model)
    ps = scores[pos][:, None]
    ns = scores[neg][None, :]
    credits = np.where(ps > ns, 1.0, np.where(ps == ns, 0.5, 0.0))
    return credits, pos, neg


def example_attributions(dataset, model):
    """Per-record share of total AUC credit.

    A positive record collects half a credit per negative it outranks
    and a quarter per tie; symmetrically for negatives. Runs in
    O(N log N) by ranking each side against the sorted other side.
    Returns an array of length ``dataset.count`` whose sum equals
    p * n * AUC to rounding error.
    """
    scores, pos, neg = _split_by_label(dataset, model)
    totals = np.zeros(dataset.count, dtype=np.float64)

    neg_sorted = np.sort(scores[neg], kind="stable")
    lo = np.searchsorted(neg_sorted, scores[pos], side="left")
    hi = np.searchsorted(neg_sorted, scores[pos], side="right")
    # lo = negatives strictly below, hi - lo = negatives tied
    totals[pos] = 0.5 * lo + 0.25 * (hi - lo)

    pos_sorted = np.sort(scores[pos], kind="stable")
    lo = np.searchsorted(pos_sorted, scores[neg], side="left")
    hi = np.searchsorted(pos_sorted, scores[neg], side="right")
    # positives strictly above = p - hi, tied = hi - lo
    totals[neg] = 0.5 * (pos.size - hi) + 0.25 * (hi - lo)
    return totals


def normalized_attributions(dataset, model, totals=None):
    """Example attributions scaled into [0, 0.5].

    Positive records are divided by the number of negatives and vice
    versa, so the value is the record's mean half-credit per opposing
    record: 0.5 means it beat every comparison, 0 means it lost all.
    """
    if totals is None:
        totals = example_attributions(dataset, model)
    scale = np.where(dataset.labels == 1, dataset.n, dataset.p).astype(np.float64)
    return totals / scale


def attribution_correlation_report(dataset, model):
    """Pearson correlation of attributions against per-example losses.

    Higher attribution should mean lower loss, so the interesting
    correlations are negative. Both attribution variants are compared
    against both loss functions.
    """
    from .metrics import ce_loss, gini_impurity, pearson_correlation

    scores = dataset.score_for(model)
    losses = {
        "ce_loss": ce_loss(dataset.labels, scores),
        "gini_impurity": gini_impurity(dataset.labels, scores),
    }
    totals = example_attributions(dataset, model)
    variants = {
        "total": totals,
        "normalized": normalized_attributions(dataset, model, totals),
    }
    return {
        variant: {
            loss_name: pearson_correlation(values, loss)
            for loss_name, loss in losses.items()
        }
        for variant, values in variants.items()
    }
