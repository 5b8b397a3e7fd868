"""Tabular evaluation data: schema, loading, saving and splitting.

Storage is columnar. A dataset holds one binary label array, one score
array per registered model, and one array per slicing feature. Numeric
features are float64 with NaN marking a missing value; categorical
features are object arrays of string tokens with None marking a missing
value. Missing labels or scores abort loading, because every downstream
quantity is undefined without them.

Datasets are immutable after construction (arrays are locked read-only),
so they can be shared freely across workers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDataset,
    LabelNotBinary,
    MissingColumn,
    ScoreOutOfRange,
    UnknownModel,
    UnparseableValue,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
_KINDS = (NUMERIC, CATEGORICAL)


@dataclass(frozen=True)
class SchemaConfig:
    """Declares how to read an evaluation table.

    Attributes
    ----------
    label_column : str
        Column holding the binary ground-truth label (0 or 1).
    score_columns : tuple of (model_name, column_name)
        One entry per model whose probability scores are present.
    feature_columns : tuple of (feature_name, kind)
        Slicing features; ``kind`` is ``"numeric"`` or ``"categorical"``.
    missing_value_token : str
        Cell content that marks a missing feature value (default: empty).
    """

    label_column: str
    score_columns: tuple = ()
    feature_columns: tuple = ()
    missing_value_token: str = ""
    delimiter: str = ","

    def __post_init__(self):
        scores = tuple((str(m), str(c)) for m, c in self.score_columns)
        features = tuple((str(f), str(k)) for f, k in self.feature_columns)
        object.__setattr__(self, "score_columns", scores)
        object.__setattr__(self, "feature_columns", features)
        if not scores:
            raise ValueError("at least one score column must be declared")
        for _, kind in features:
            if kind not in _KINDS:
                raise ValueError(f"feature kind must be one of {_KINDS}, got {kind!r}")
        columns = [self.label_column] + [c for _, c in scores] + [f for f, _ in features]
        if len(set(columns)) != len(columns):
            raise ValueError(f"column names must be distinct, got {columns}")
        models = [m for m, _ in scores]
        if len(set(models)) != len(models):
            raise ValueError(f"model names must be distinct, got {models}")

    @property
    def model_names(self):
        return tuple(m for m, _ in self.score_columns)

    @property
    def feature_names(self):
        return tuple(f for f, _ in self.feature_columns)

    def feature_kind(self, name):
        for feature, kind in self.feature_columns:
            if feature == name:
                return kind
        raise MissingColumn(name)

    @classmethod
    def from_dict(cls, config):
        """Build a schema from a JSON-style dict.

        Score column entries may be ``"column"`` strings (model named after
        the column), ``[model, column]`` pairs, or ``{"model":, "column":}``
        objects. Feature entries may be ``[name, kind]`` pairs or
        ``{"name":, "kind":}`` objects.
        """
        scores = []
        for entry in config.get("score_columns", ()):
            if isinstance(entry, str):
                scores.append((entry, entry))
            elif isinstance(entry, dict):
                scores.append((entry["model"], entry["column"]))
            else:
                model, column = entry
                scores.append((model, column))
        features = []
        for entry in config.get("feature_columns", ()):
            if isinstance(entry, dict):
                features.append((entry["name"], entry["kind"]))
            else:
                name, kind = entry
                features.append((name, kind))
        return cls(
            label_column=config["label_column"],
            score_columns=tuple(scores),
            feature_columns=tuple(features),
            missing_value_token=config.get("missing_value_token", ""),
            delimiter=config.get("delimiter", ","),
        )

    @classmethod
    def from_json_file(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass(frozen=True)
class EvalRecord:
    """A single evaluation example, materialized on demand.

    ``scores`` maps model name to probability; ``features`` maps feature
    name to a float, a token string, or None when missing.
    """

    index: int
    label: int
    scores: dict = field(compare=False)
    features: dict = field(compare=False)


class EvalDataset:
    """Immutable columnar store of labels, model scores and features."""

    def __init__(self, schema, labels, scores, features):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        count = labels.size
        self.schema = schema
        self.labels = labels

        self.scores = {}
        for model in schema.model_names:
            values = np.asarray(scores[model], dtype=np.float64)
            if values.shape != (count,):
                raise ValueError(f"score column for {model!r} has wrong length")
            if values.size and (
                not np.isfinite(values).all() or values.min() < 0.0 or values.max() > 1.0
            ):
                raise ValueError(f"scores for {model!r} must lie in [0, 1]")
            self.scores[model] = values

        self.features = {}
        for name, kind in schema.feature_columns:
            column = features[name]
            if kind == NUMERIC:
                column = np.asarray(column, dtype=np.float64)
            else:
                column = np.asarray(column, dtype=object)
            if column.shape != (count,):
                raise ValueError(f"feature column {name!r} has wrong length")
            self.features[name] = column

        for array in [self.labels, *self.scores.values(), *self.features.values()]:
            array.setflags(write=False)

    @classmethod
    def from_columns(cls, labels, scores, numeric_features=None, categorical_features=None,
                     missing_value_token=""):
        """Build a dataset directly from arrays (no file round trip).

        ``scores`` maps model name to an array of probabilities;
        the two feature dicts map feature name to value arrays.
        """
        numeric_features = dict(numeric_features or {})
        categorical_features = dict(categorical_features or {})
        schema = SchemaConfig(
            label_column="label",
            score_columns=tuple((m, m) for m in scores),
            feature_columns=tuple((f, NUMERIC) for f in numeric_features)
            + tuple((f, CATEGORICAL) for f in categorical_features),
            missing_value_token=missing_value_token,
        )
        return cls(schema, labels, scores, {**numeric_features, **categorical_features})

    @property
    def count(self):
        return int(self.labels.size)

    @property
    def p(self):
        """Number of positive-label records (always derived from labels)."""
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n(self):
        """Number of negative-label records."""
        return self.count - self.p

    @property
    def positive_indices(self):
        return np.flatnonzero(self.labels == 1)

    @property
    def negative_indices(self):
        return np.flatnonzero(self.labels == 0)

    def __len__(self):
        return self.count

    def score_for(self, model):
        try:
            return self.scores[model]
        except KeyError:
            raise UnknownModel(model, self.scores) from None

    def feature_kind(self, name):
        return self.schema.feature_kind(name)

    def feature_values(self, name):
        try:
            return self.features[name]
        except KeyError:
            raise MissingColumn(name) from None

    def record(self, index):
        """Materialize one row as an :class:`EvalRecord`."""
        features = {}
        for name, kind in self.schema.feature_columns:
            value = self.features[name][index]
            if kind == NUMERIC:
                value = None if math.isnan(value) else float(value)
            features[name] = value
        return EvalRecord(
            index=int(index),
            label=int(self.labels[index]),
            scores={m: float(self.scores[m][index]) for m in self.schema.model_names},
            features=features,
        )

    def records(self):
        for index in range(self.count):
            yield self.record(index)

    def subset(self, indices):
        """A new dataset holding only the given rows, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        return EvalDataset(
            self.schema,
            self.labels[indices],
            {m: v[indices] for m, v in self.scores.items()},
            {f: v[indices] for f, v in self.features.items()},
        )


def _parse_label(token, row, missing_token):
    if token is None or token.strip() == missing_token:
        raise LabelNotBinary(row, token)
    try:
        value = float(token)
    except ValueError:
        raise LabelNotBinary(row, token) from None
    if value not in (0.0, 1.0):
        raise LabelNotBinary(row, token)
    return int(value)


def _parse_score(token, row, column, model, missing_token):
    if token is None or token.strip() == missing_token:
        raise UnparseableValue(row, column, token)
    try:
        value = float(token)
    except ValueError:
        raise UnparseableValue(row, column, token) from None
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise ScoreOutOfRange(row, model, token)
    return value


def _parse_numeric_feature(token, row, column, missing_token):
    if token is None or token.strip() == missing_token:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        raise UnparseableValue(row, column, token) from None
    # non-finite feature values cannot be thresholded; treat as missing
    return value if math.isfinite(value) else math.nan


def load_dataset(path, schema, delimiter=None):
    """Read a delimited text file with a header row into a dataset.

    The delimiter defaults to the schema's (a comma unless declared
    otherwise). Row numbers in error messages are 1-based over the data
    rows (the header is row 0). Missing feature values are recorded as
    missing; a missing label or score aborts the load.
    """
    if delimiter is None:
        delimiter = schema.delimiter
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        position = {}
        for column in [schema.label_column] + [c for _, c in schema.score_columns] + \
                      [f for f, _ in schema.feature_columns]:
            if column not in header:
                raise MissingColumn(column)
            position[column] = header.index(column)

        missing = schema.missing_value_token
        labels = []
        scores = {model: [] for model in schema.model_names}
        features = {name: [] for name in schema.feature_names}
        for row_number, row in enumerate(reader, start=1):
            def cell(column):
                index = position[column]
                return row[index] if index < len(row) else None

            labels.append(_parse_label(cell(schema.label_column), row_number, missing))
            for model, column in schema.score_columns:
                scores[model].append(
                    _parse_score(cell(column), row_number, column, model, missing)
                )
            for name, kind in schema.feature_columns:
                token = cell(name)
                if kind == NUMERIC:
                    features[name].append(
                        _parse_numeric_feature(token, row_number, name, missing)
                    )
                else:
                    token = "" if token is None else token
                    features[name].append(None if token.strip() == missing else token)

    return EvalDataset(schema, labels, scores, features)


def save_dataset(dataset, path, delimiter=None):
    """Write a dataset back to delimited text at full float precision.

    ``load_dataset(save_dataset(d))`` reproduces labels, scores and
    feature values bit-exactly (floats use the shortest round-trip form).
    """
    schema = dataset.schema
    if delimiter is None:
        delimiter = schema.delimiter
    header = [schema.label_column] + [c for _, c in schema.score_columns] + \
             list(schema.feature_names)
    missing = schema.missing_value_token
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(header)
        for i in range(dataset.count):
            row = [str(int(dataset.labels[i]))]
            for model, _ in schema.score_columns:
                row.append(repr(float(dataset.scores[model][i])))
            for name, kind in schema.feature_columns:
                value = dataset.features[name][i]
                if kind == NUMERIC:
                    row.append(missing if math.isnan(value) else repr(float(value)))
                else:
                    row.append(missing if value is None else str(value))
            writer.writerow(row)


def split_indices(count, fraction, seed):
    """Partition ``range(count)`` by a seeded uniform shuffle.

    The first part receives ``floor(fraction * count)`` indices; both
    parts are returned in ascending order.
    """
    rng = np.random.default_rng(seed)
    permutation = rng.permutation(count)
    k = int(math.floor(fraction * count))
    return np.sort(permutation[:k]), np.sort(permutation[k:])


def split_dataset(dataset, fraction, seed):
    """Split a dataset into two disjoint parts by a seeded shuffle.

    Deterministic for a fixed seed. Raises :class:`EmptyDataset` for an
    empty input and ValueError for a fraction outside (0, 1).
    """
    if dataset.count == 0:
        raise EmptyDataset()
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    first, second = split_indices(dataset.count, fraction, seed)
    return dataset.subset(first), dataset.subset(second)
