"""aucseg: attribute a classifier's AUC-ROC and segment the attributions.

The library decomposes AUC-ROC over individual examples and over
positive/negative pairs, then finds human-readable segments where a
model ranks unusually well or badly, using regression trees with honest
held-out estimates and a false-discovery flag per segment.
"""

__version__ = "0.1.0"

from .attribution import (
    PairCredit,
    attribution_correlation_report,
    example_attributions,
    normalized_attributions,
    pair_attributions,
    pair_credit_matrix,
)
from .dataset import (
    EvalDataset,
    EvalRecord,
    SchemaConfig,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .errors import (
    AucSegError,
    ComputeError,
    DataError,
    DegenerateLabels,
    EmptyDataset,
    LabelNotBinary,
    LengthMismatch,
    MissingColumn,
    NonCategoricalFeature,
    ScoreOutOfRange,
    TooFewRecords,
    UnknownModel,
    UnparseableValue,
    ZeroVariance,
)
from .features import FeatureColumn, FeatureMatrix
from .heatmap import heatmap_svg
from .metrics import (
    RocCurve,
    auc,
    ce_loss,
    gini_impurity,
    metrics_report,
    pearson_correlation,
    roc_curve,
)
from .pair_analysis import (
    HEADROOM_KIND,
    MEAN_KIND,
    CrossMatrix,
    PairDataset,
    PairSegmentReport,
    PairSegmentRow,
    build_pair_dataset,
    cross_matrix,
    segment_pairs,
)
from .segmentation import (
    SegmentLeaf,
    SegmentReport,
    SegmentTree,
    SegmentationResult,
    SplitNode,
    SplitRule,
    TreeParams,
    fit_tree,
    honest_estimate,
    segment_examples,
    segment_model_delta,
    to_dot,
)
from .stats import WelchResult, welch_t_test, welch_t_test_from_samples

__all__ = [
    "AucSegError",
    "ComputeError",
    "CrossMatrix",
    "DataError",
    "DegenerateLabels",
    "EmptyDataset",
    "EvalDataset",
    "EvalRecord",
    "FeatureColumn",
    "FeatureMatrix",
    "HEADROOM_KIND",
    "LabelNotBinary",
    "LengthMismatch",
    "MEAN_KIND",
    "MissingColumn",
    "NonCategoricalFeature",
    "PairCredit",
    "PairDataset",
    "PairSegmentReport",
    "PairSegmentRow",
    "RocCurve",
    "SchemaConfig",
    "ScoreOutOfRange",
    "SegmentLeaf",
    "SegmentReport",
    "SegmentTree",
    "SegmentationResult",
    "SplitNode",
    "SplitRule",
    "TooFewRecords",
    "TreeParams",
    "UnknownModel",
    "UnparseableValue",
    "WelchResult",
    "ZeroVariance",
    "attribution_correlation_report",
    "auc",
    "build_pair_dataset",
    "ce_loss",
    "cross_matrix",
    "example_attributions",
    "fit_tree",
    "gini_impurity",
    "heatmap_svg",
    "honest_estimate",
    "load_dataset",
    "metrics_report",
    "normalized_attributions",
    "pair_attributions",
    "pair_credit_matrix",
    "pearson_correlation",
    "roc_curve",
    "save_dataset",
    "segment_examples",
    "segment_model_delta",
    "segment_pairs",
    "split_dataset",
    "to_dot",
    "welch_t_test",
    "welch_t_test_from_samples",
]
