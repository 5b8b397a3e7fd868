"""Feature views used by the segmentation trees and cross matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CATEGORICAL, NUMERIC
from .errors import MissingColumn, NonCategoricalFeature

MISSING_CATEGORY = "(missing)"


@dataclass(frozen=True)
class FeatureColumn:
    """One named feature column plus its declared kind."""

    name: str
    kind: str
    values: np.ndarray

    @property
    def is_numeric(self):
        return self.kind == NUMERIC


class FeatureMatrix:
    """Ordered collection of feature columns aligned to one row set.

    ``count`` must be given when there are no columns (an empty feature
    space still describes a fixed number of rows).
    """

    def __init__(self, columns, count=None):
        self.columns = list(columns)
        if self.columns:
            count = self.columns[0].values.size
            for column in self.columns:
                if column.values.size != count:
                    raise ValueError("feature columns differ in length")
        elif count is None:
            count = 0
        self._count = int(count)

    @classmethod
    def from_dataset(cls, dataset, names=None):
        if names is None:
            names = dataset.schema.feature_names
        columns = []
        for name in names:
            kind = dataset.feature_kind(name)
            columns.append(FeatureColumn(name, kind, dataset.feature_values(name)))
        return cls(columns, count=dataset.count)

    @property
    def count(self):
        return self._count

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            (FeatureColumn(c.name, c.kind, c.values[indices]) for c in self.columns),
            count=indices.size,
        )

    def column(self, name):
        for column in self.columns:
            if column.name == name:
                return column
        raise MissingColumn(name)


def categories_of(dataset, feature):
    """Feature values with missing mapped to a reserved category.

    Returns ``(values, categories)`` where ``values`` is an object array
    of tokens and ``categories`` is their sorted distinct list. Only
    categorical features qualify; the reserved missing token sorts with
    the rest.
    """
    kind = dataset.feature_kind(feature)
    if kind != CATEGORICAL:
        raise NonCategoricalFeature(feature)
    raw = dataset.feature_values(feature)
    values = np.array(
        [MISSING_CATEGORY if v is None else str(v) for v in raw], dtype=object
    )
    return values, sorted(set(values.tolist()))


def bin_numeric(values, bins):
    """Quantile-bin a numeric column into labeled categories.

    Edges are the ``bins``-quantiles of the finite values; bins are
    left-open except the first. Labels render the interval. NaNs map to
    the reserved missing category. Returns ``(tokens, categories)``.
    """
    values = np.asarray(values, dtype=np.float64)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        tokens = np.array([MISSING_CATEGORY] * values.size, dtype=object)
        return tokens, [MISSING_CATEGORY]
    edges = np.unique(np.quantile(finite, np.linspace(0.0, 1.0, bins + 1)))
    inner = edges[1:-1]
    labels = []
    for k in range(inner.size + 1):
        lo = "-inf" if k == 0 else f"{inner[k - 1]:.6g}"
        hi = "inf" if k == inner.size else f"{inner[k]:.6g}"
        labels.append(f"({lo}, {hi}]" if k else f"[{lo}, {hi}]".replace("[-inf", "(-inf"))
    tokens = np.empty(values.size, dtype=object)
    for i, v in enumerate(values):
        if math.isnan(v):
            tokens[i] = MISSING_CATEGORY
        else:
            k = int(np.searchsorted(inner, v, side="left"))
            tokens[i] = labels[k]
    categories = [label for label in labels if (tokens == label).any()]
    if (tokens == MISSING_CATEGORY).any():
        categories.append(MISSING_CATEGORY)
    return tokens, categories
