"""
Finding the failing decision boundary
=====================================

Example-level segmentation says which records drag AUC down. Pair-level
segmentation goes one step further: it fits a tree over sampled
(positive, negative) pairs, so a leaf names both sides of the confusion
at once, e.g. "new-account positives against high-spend negatives".
"""

import numpy as np

from aucseg import EvalDataset, TreeParams, auc, segment_pairs

rng = np.random.default_rng(21)
n = 6000

labels = rng.integers(0, 2, n)
account = rng.choice(np.array(["new", "established"], dtype=object), n,
                     p=[0.3, 0.7])
spend = rng.choice(np.array(["low", "high"], dtype=object), n)

# The model separates well except for one specific cross: positives from
# new accounts score below negatives with high spend.
scores = np.where(labels == 1, 0.72, 0.28) + rng.normal(0, 0.06, n)
scores[(labels == 1) & (account == "new")] = (
    0.40 + rng.normal(0, 0.06, ((labels == 1) & (account == "new")).sum())
)
scores[(labels == 0) & (spend == "high")] = (
    0.52 + rng.normal(0, 0.06, ((labels == 0) & (spend == "high")).sum())
)
scores = np.clip(scores, 0.0, 1.0)

dataset = EvalDataset.from_columns(
    labels, {"scorer": scores},
    categorical_features={"account": account, "spend": spend},
)
print(f"overall AUC: {auc(labels, scores):.4f}")

# Sample a budget of pairs, attach each side's features with _pos/_neg
# suffixes, and segment the 1/0.5/0 credits. Low honest means mark the
# crosses the model gets wrong.
result = segment_pairs(
    dataset, "scorer",
    dims=["account", "spend"],
    pair_budget=40000,
    params=TreeParams(max_depth=2, min_leaf_size=2000),
    seed=7,
)
report = result.report
print(report.to_text())

worst = min(
    (row for row in report.rows if row.est_count),
    key=lambda row: row.honest_mean,
)
print(f"worst cross: positives {worst.positive_slice} vs "
      f"negatives {worst.negative_slice} "
      f"(honest mean credit {worst.honest_mean:.3f})")
