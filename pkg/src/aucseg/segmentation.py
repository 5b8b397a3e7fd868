"""Regression-tree segmentation of attribution values with honest estimates.

A CART-style tree is grown greedily on one half of the data to predict a
per-record target (normalized attribution, attribution delta between two
models, or pair credit). Leaf means are then re-estimated from the held
out half, and a Welch two-sample test compares the two halves inside
each leaf: a small p-value means the leaf's fit-half mean does not
replicate, so the segment is flagged as a likely false discovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import split_indices
from .errors import TooFewRecords
from .features import FeatureMatrix
from .formatting import sig3
from .stats import welch_t_test

GAIN_EPSILON = 1e-12


@dataclass(frozen=True)
class TreeParams:
    """Hyperparameters shared by all segmentation entry points."""

    max_depth: int = 3
    min_leaf_size: int = 100
    significance_level: float = 0.05
    fit_fraction: float = 0.5
    exact_p_value: bool = False
    max_categories_exhaustive: int = 8

    def override(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class SplitRule:
    """A single routing decision: rows matching the rule go left.

    Numeric: value <= threshold goes left. Categorical: value in tokens
    goes left. Missing values always go left, for both kinds.
    """

    feature: str
    threshold: float = None
    tokens: frozenset = None

    @property
    def is_numeric(self):
        return self.threshold is not None

    def goes_left(self, values):
        if self.is_numeric:
            values = np.asarray(values, dtype=np.float64)
            return (values <= self.threshold) | np.isnan(values)
        tokens = self.tokens
        return np.fromiter(
            ((v is None) or (v in tokens) for v in values), dtype=bool, count=len(values)
        )

    def describe(self, went_left):
        if self.is_numeric:
            op = "<=" if went_left else ">"
            return f"{self.feature} {op} {self.threshold:.6g}"
        tokens = sorted(self.tokens)
        if len(tokens) == 1:
            op = "=" if went_left else "!="
            return f"{self.feature} {op} {tokens[0]}"
        op = "in" if went_left else "not in"
        return f"{self.feature} {op} {{{', '.join(tokens)}}}"


def describe_path(path):
    """Human-readable conjunction for a root-to-leaf path."""
    if not path:
        return "All data"
    return " and ".join(rule.describe(went_left) for rule, went_left in path)


@dataclass(frozen=True)
class SegmentLeaf:
    """A tree leaf with fit-half statistics and (optionally) honest ones."""

    leaf_id: int
    path: tuple
    fit_count: int
    fit_mean: float
    fit_variance: float
    est_count: int = None
    honest_mean: float = None
    t_statistic: float = None
    p_value: float = None
    false_discovery: bool = None

    @property
    def segment(self):
        return describe_path(self.path)


@dataclass(frozen=True)
class SplitNode:
    rule: SplitRule
    left: object
    right: object


@dataclass(frozen=True)
class SegmentTree:
    """An immutable fitted tree plus the target it predicts."""

    root: object
    target: dict
    params: TreeParams
    feature_names: tuple = field(default=())

    def leaves(self):
        """Leaves in left-to-right order (ascending leaf_id)."""
        found = []

        def walk(node):
            if isinstance(node, SegmentLeaf):
                found.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return found

    def assign(self, features):
        """Route every row of a feature matrix to its leaf id."""
        ids = np.empty(features.count, dtype=np.int64)
        indices = np.arange(features.count)

        def walk(node, idx):
            if isinstance(node, SegmentLeaf):
                ids[idx] = node.leaf_id
                return
            column = features.column(node.rule.feature)
            left = node.rule.goes_left(column.values[idx])
            walk(node.left, idx[left])
            walk(node.right, idx[~left])

        walk(self.root, indices)
        return ids

    def depth(self):
        def walk(node):
            if isinstance(node, SegmentLeaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def _node_stats(y):
    count = y.size
    total = float(y.sum())
    total_sq = float((y * y).sum())
    sse = total_sq - total * total / count if count else 0.0
    return count, total, total_sq, max(sse, 0.0)


def _best_numeric_split(column, idx, y, stats, min_leaf):
    values = np.asarray(column.values[idx], dtype=np.float64)
    count, total, total_sq, sse = stats
    missing = np.isnan(values)
    n_miss = int(missing.sum())
    y_miss = y[missing]
    miss_sum = float(y_miss.sum())
    miss_sq = float((y_miss * y_miss).sum())

    finite = ~missing
    v = values[finite]
    if v.size < 2:
        return None
    order = np.argsort(v, kind="stable")
    v = v[order]
    ys = y[finite][order]
    prefix = np.cumsum(ys)
    prefix_sq = np.cumsum(ys * ys)

    ks = np.flatnonzero(v[1:] != v[:-1]) + 1
    if ks.size == 0:
        return None
    left_count = ks + n_miss
    right_count = count - left_count
    valid = (left_count >= min_leaf) & (right_count >= min_leaf)
    if not valid.any():
        return None
    ks = ks[valid]
    left_count = left_count[valid]
    right_count = right_count[valid]
    left_sum = prefix[ks - 1] + miss_sum
    left_sq = prefix_sq[ks - 1] + miss_sq
    right_sum = total - left_sum
    right_sq = total_sq - left_sq
    gains = sse - (left_sq - left_sum * left_sum / left_count) \
                - (right_sq - right_sum * right_sum / right_count)
    best = int(np.argmax(gains))
    k = int(ks[best])
    threshold = (v[k - 1] + v[k]) / 2.0
    if threshold >= v[k]:  # midpoint rounded up against its neighbor
        threshold = v[k - 1]
    rule = SplitRule(column.name, threshold=float(threshold))
    return float(gains[best]), rule


def _best_categorical_split(column, idx, y, stats, min_leaf, max_exhaustive):
    values = column.values[idx]
    count, total, total_sq, sse = stats
    missing = np.fromiter((v is None for v in values), dtype=bool, count=len(values))
    n_miss = int(missing.sum())
    y_miss = y[missing]
    miss_sum = float(y_miss.sum())
    miss_sq = float((y_miss * y_miss).sum())

    present = np.array([str(v) for v in values[~missing]], dtype=object)
    if present.size == 0:
        return None
    y_present = y[~missing]
    tokens, inverse = np.unique(present, return_inverse=True)
    k = tokens.size
    if k < 2:
        return None
    token_count = np.bincount(inverse, minlength=k)
    token_sum = np.bincount(inverse, weights=y_present, minlength=k)
    token_sq = np.bincount(inverse, weights=y_present * y_present, minlength=k)

    if k <= max_exhaustive:
        subsets = range(1, (1 << k) - 1)
        members = [np.flatnonzero([(m >> i) & 1 for i in range(k)]) for m in subsets]
    else:
        members = [np.array([i]) for i in range(k)]

    best = None
    for chosen in members:
        left_count = int(token_count[chosen].sum()) + n_miss
        right_count = count - left_count
        if left_count < min_leaf or right_count < min_leaf:
            continue
        left_sum = float(token_sum[chosen].sum()) + miss_sum
        left_sq = float(token_sq[chosen].sum()) + miss_sq
        right_sum = total - left_sum
        right_sq = total_sq - left_sq
        gain = sse - (left_sq - left_sum * left_sum / left_count) \
                   - (right_sq - right_sum * right_sum / right_count)
        if best is None or gain > best[0]:
            rule = SplitRule(column.name, tokens=frozenset(tokens[chosen].tolist()))
            best = (gain, rule)
    return best


def _best_split(features, idx, y, params):
    stats = _node_stats(y)
    sse = stats[3]
    tolerance = GAIN_EPSILON * max(1.0, abs(sse))
    best = None
    for column in features.columns:
        if column.is_numeric:
            candidate = _best_numeric_split(column, idx, y, stats, params.min_leaf_size)
        else:
            candidate = _best_categorical_split(
                column, idx, y, stats, params.min_leaf_size,
                params.max_categories_exhaustive,
            )
        if candidate is None or candidate[0] <= tolerance:
            continue
        if best is None or candidate[0] > best[0]:
            best = candidate
    return None if best is None else best[1]


def fit_tree(values, features, params=None, seed=None, target=None):
    """Grow a greedy variance-reduction tree on (values, features).

    Splits maximize the drop in within-node sum of squared deviations;
    ties go to the earliest feature and lowest threshold. Growth stops
    at ``max_depth``, or when no split leaves both children holding at
    least ``min_leaf_size`` rows, or when no split reduces variance.
    The algorithm is deterministic; ``seed`` is accepted for interface
    uniformity and unused.
    """
    del seed
    params = params or TreeParams()
    values = np.asarray(values, dtype=np.float64)
    if features.count != values.size:
        raise ValueError("target length must match feature matrix rows")
    if values.size < 2 * params.min_leaf_size:
        raise TooFewRecords(2 * params.min_leaf_size, values.size)

    counter = {"next": 0}

    def grow(idx, depth, path):
        y = values[idx]
        rule = None
        if depth < params.max_depth and idx.size >= 2 * params.min_leaf_size:
            rule = _best_split(features, idx, y, params)
        if rule is None:
            leaf_id = counter["next"]
            counter["next"] += 1
            variance = float(y.var(ddof=1)) if y.size > 1 else 0.0
            return SegmentLeaf(
                leaf_id=leaf_id,
                path=path,
                fit_count=int(idx.size),
                fit_mean=float(y.mean()),
                fit_variance=variance,
            )
        column = features.column(rule.feature)
        left = rule.goes_left(column.values[idx])
        return SplitNode(
            rule,
            grow(idx[left], depth + 1, path + ((rule, True),)),
            grow(idx[~left], depth + 1, path + ((rule, False),)),
        )

    root = grow(np.arange(values.size), 0, ())
    names = tuple(c.name for c in features.columns)
    return SegmentTree(root=root, target=target or {}, params=params,
                       feature_names=names)


def honest_estimate(tree, features, values, significance_level=None, exact=None):
    """Re-estimate leaf means from held-out data and flag non-replication.

    Each leaf receives the mean of the held-out targets routed to it, a
    Welch t-statistic comparing fit-half and held-out targets, and a
    two-sided p-value; ``false_discovery`` is ``p_value < alpha``. A leaf
    that receives no held-out rows gets p-value 0 (nothing corroborates
    it) and a NaN honest mean. Returns a new tree; the input is untouched.
    """
    if significance_level is None:
        significance_level = tree.params.significance_level
    if exact is None:
        exact = tree.params.exact_p_value
    values = np.asarray(values, dtype=np.float64)
    if features.count != values.size:
        raise ValueError("target length must match feature matrix rows")
    ids = tree.assign(features)

    def enrich(node):
        if isinstance(node, SplitNode):
            return SplitNode(node.rule, enrich(node.left), enrich(node.right))
        sample = values[ids == node.leaf_id]
        if sample.size == 0:
            return replace(
                node, est_count=0, honest_mean=math.nan, t_statistic=math.nan,
                p_value=0.0, false_discovery=0.0 < significance_level,
            )
        est_mean = float(sample.mean())
        est_var = float(sample.var(ddof=1)) if sample.size > 1 else 0.0
        result = welch_t_test(
            node.fit_mean, node.fit_variance, node.fit_count,
            est_mean, est_var, sample.size, exact=exact,
        )
        return replace(
            node, est_count=int(sample.size), honest_mean=est_mean,
            t_statistic=result.statistic, p_value=result.p_value,
            false_discovery=result.p_value < significance_level,
        )

    return SegmentTree(root=enrich(tree.root), target=tree.target,
                       params=tree.params, feature_names=tree.feature_names)


@dataclass(frozen=True)
class SegmentRow:
    """One report line: a leaf described as a slice plus its estimates."""

    leaf_id: int
    segment: str
    path: tuple
    fit_count: int
    est_count: int
    fit_mean: float
    honest_mean: float
    t_statistic: float
    p_value: float
    false_discovery: bool


@dataclass(frozen=True)
class SegmentReport:
    """Leaf table for a fitted-and-estimated segmentation tree."""

    target: dict
    rows: tuple
    fit_count: int
    est_count: int
    fit_mean: float
    est_mean: float
    value_label: str = "Mean"

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
                "segment": row.segment,
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
            lines.append([row.segment, str(row.est_count), value])
        table = align_table(lines, header=["Segment", "Count", self.value_label],
                            right=(1, 2))
        footer = "* estimate does not replicate on the held-out half"
        if any(row.false_discovery for row in self.rows):
            table += "\n" + footer
        return table


def build_report(tree, value_label="Mean"):
    """Rank an estimated tree's leaves into a :class:`SegmentReport`.

    Rows are ordered by honest mean, highest first; leaves that received
    no held-out rows sort last.
    """
    leaves = tree.leaves()
    if any(leaf.est_count is None for leaf in leaves):
        raise ValueError("tree has no honest estimates yet")

    def sort_key(leaf):
        mean = leaf.honest_mean
        empty = 1 if (mean is None or math.isnan(mean)) else 0
        return (empty, -(mean if not empty else 0.0), leaf.leaf_id)

    rows = tuple(
        SegmentRow(
            leaf_id=leaf.leaf_id,
            segment=leaf.segment,
            path=leaf.path,
            fit_count=leaf.fit_count,
            est_count=leaf.est_count,
            fit_mean=leaf.fit_mean,
            honest_mean=leaf.honest_mean,
            t_statistic=leaf.t_statistic,
            p_value=leaf.p_value,
            false_discovery=leaf.false_discovery,
        )
        for leaf in sorted(leaves, key=sort_key)
    )
    fit_count = sum(leaf.fit_count for leaf in leaves)
    est_count = sum(leaf.est_count for leaf in leaves)
    fit_mean = sum(leaf.fit_mean * leaf.fit_count for leaf in leaves) / fit_count
    est_total = sum(
        leaf.honest_mean * leaf.est_count for leaf in leaves if leaf.est_count
    )
    est_mean = est_total / est_count if est_count else math.nan
    return SegmentReport(
        target=tree.target, rows=rows, fit_count=fit_count, est_count=est_count,
        fit_mean=fit_mean, est_mean=est_mean, value_label=value_label,
    )


class SegmentationResult:
    """Bundle of the estimated tree and its leaf report."""

    def __init__(self, tree, report):
        self.tree = tree
        self.report = report


def _segment_target(dataset, target_values, target, dims, params, seed,
                    value_label):
    params = params or TreeParams()
    features = FeatureMatrix.from_dataset(dataset, dims)
    fit_idx, est_idx = split_indices(dataset.count, params.fit_fraction, seed)
    tree = fit_tree(
        target_values[fit_idx], features.subset(fit_idx), params, target=target,
    )
    tree = honest_estimate(tree, features.subset(est_idx), target_values[est_idx])
    return SegmentationResult(tree, build_report(tree, value_label=value_label))


def segment_examples(dataset, model, dims, params=None, seed=0):
    """Find slices where per-example normalized attribution is unusual.

    Attributions are computed on the full dataset; the rows are then
    split into a fit half and an estimation half (seeded), a tree is
    grown on the fit half over the ``dims`` features, and leaf means are
    honest-estimated from the other half.
    """
    from .attribution import normalized_attributions

    target_values = normalized_attributions(dataset, model)
    target = {"kind": "normalized_attribution", "model": model}
    return _segment_target(dataset, target_values, target, dims, params, seed,
                           value_label="AUC Attribution")


def segment_model_delta(dataset, model_a, model_b, dims, params=None, seed=0):
    """Segment the per-example attribution difference of two models.

    The target is normalized attribution under ``model_a`` minus under
    ``model_b``; positive leaves favor ``model_a``.
    """
    from .attribution import normalized_attributions

    target_values = normalized_attributions(dataset, model_a) \
        - normalized_attributions(dataset, model_b)
    target = {"kind": "delta_attribution", "model_a": model_a, "model_b": model_b}
    return _segment_target(dataset, target_values, target, dims, params, seed,
                           value_label="Attribution Delta")


def to_dot(tree, name="segments"):
    """Render a tree as Graphviz DOT; flagged leaves are shaded darker."""
    lines = [f"digraph {name} {{", "  node [fontname=\"Helvetica\"];"]
    counter = {"next": 0}

    def walk(node):
        my_id = counter["next"]
        counter["next"] += 1
        if isinstance(node, SegmentLeaf):
            label_parts = [f"leaf {node.leaf_id}"]
            if node.est_count is not None:
                label_parts.append(f"mean {sig3(node.honest_mean)}")
                label_parts.append(f"n {node.est_count}")
                if node.false_discovery:
                    label_parts.append("*")
            else:
                label_parts.append(f"mean {sig3(node.fit_mean)}")
                label_parts.append(f"n {node.fit_count}")
            fill = "#6baed6" if node.false_discovery else "#deebf7"
            label = "\\n".join(label_parts)
            lines.append(
                f'  n{my_id} [shape=box style=filled fillcolor="{fill}" '
                f'label="{label}"];'
            )
            return my_id
        label = node.rule.describe(True)
        lines.append(f'  n{my_id} [shape=ellipse label="{label}"];')
        left_id = walk(node.left)
        right_id = walk(node.right)
        lines.append(f'  n{my_id} -> n{left_id} [label="yes"];')
        lines.append(f'  n{my_id} -> n{right_id} [label="no"];')
        return my_id

    walk(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"
