"""
Where the misordered pairs live
===============================

Pair credits can be aggregated over every (positive category, negative
category) cross of a partition. The diagonal of the mean matrix is each
slice's own AUC; the headroom matrix counts the misordered pairs, which
is where any future AUC gain has to come from.
"""

from pathlib import Path

import numpy as np

from aucseg import EvalDataset, auc, cross_matrix

rng = np.random.default_rng(13)
n = 3000

labels = rng.integers(0, 2, n)
tier = rng.choice(np.array(["free", "plus", "pro"], dtype=object), n)

# "free" positives score low, so pairs crossing a free positive with a
# paying negative dominate the headroom.
base = np.where(labels == 1, 0.7, 0.3)
weak = (tier == "free") & (labels == 1)
base[weak] = 0.45
scores = np.clip(base + rng.normal(0, 0.1, n), 0.0, 1.0)

dataset = EvalDataset.from_columns(
    labels, {"scorer": scores}, categorical_features={"tier": tier},
)

mean = cross_matrix(dataset, "scorer", "tier", kind="mean")
head = cross_matrix(dataset, "scorer", "tier", kind="headroom")

print("mean pair credit (rows: positive's tier, cols: negative's tier):")
print(mean.to_csv())
print("misordered pair counts:")
print(head.to_csv())

total_pairs = dataset.p * dataset.n
overall = auc(labels, scores)
print(f"headroom total {head.total:.1f} = p*n*(1-AUC) = "
      f"{total_pairs * (1 - overall):.1f}")

# Both matrices render as standalone SVG heatmaps.
out_dir = Path(__file__).with_name("output")
out_dir.mkdir(exist_ok=True)
for name, matrix in (("mean", mean), ("headroom", head)):
    path = out_dir / f"cross_{name}.svg"
    path.write_text(matrix.to_svg(), encoding="utf-8")
    print(f"wrote {path}")
