"""
Comparing two models slice by slice
===================================

Two models with similar overall AUC can still disagree about who they
serve well. Segmenting the per-example attribution difference surfaces
the slices where a candidate model wins or loses against the incumbent.
"""

import numpy as np

from aucseg import EvalDataset, TreeParams, auc, segment_model_delta

rng = np.random.default_rng(21)
n = 5000

labels = rng.integers(0, 2, n)
region = rng.choice(np.array(["north", "south", "west"], dtype=object), n)

# The incumbent is decent everywhere.
incumbent = np.clip(np.where(labels == 1, 0.68, 0.32)
                    + rng.normal(0, 0.12, n), 0.0, 1.0)

# The candidate is sharper overall but falls apart in the west.
candidate = np.clip(np.where(labels == 1, 0.75, 0.25)
                    + rng.normal(0, 0.12, n), 0.0, 1.0)
west = region == "west"
candidate[west] = np.clip(0.5 + rng.normal(0, 0.15, int(west.sum())), 0.0, 1.0)

dataset = EvalDataset.from_columns(
    labels, {"candidate": candidate, "incumbent": incumbent},
    categorical_features={"region": region},
)

for name in ("candidate", "incumbent"):
    print(f"{name:>10}: AUC {auc(labels, dataset.score_for(name)):.4f}")

# Positive leaf means favor the first model; negative means favor the
# second. The held-out estimates keep the comparison honest.
result = segment_model_delta(
    dataset, "candidate", "incumbent", dims=["region"],
    params=TreeParams(max_depth=2, min_leaf_size=200), seed=4,
)

print()
print(result.report.to_text())
print()
print("the candidate wins in the north and south but loses the west, "
      "which the overall AUC alone would have hidden")
