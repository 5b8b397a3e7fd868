"""Command-line interface.

Exit codes: 0 success, 1 usage problems, 2 data loading/validation
failures, 3 computation failures (degenerate labels, zero variance,
unknown model). Machine outputs are JSON/CSV with full-precision floats;
human tables round to three significant digits. All file outputs are
written to a temporary file and renamed into place, so a failed run
never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from . import __version__
from .attribution import example_attributions, normalized_attributions, pair_attributions
from .dataset import SchemaConfig, load_dataset
from .errors import ComputeError, DataError
from .formatting import align_table, jsonify, sig3
from .metrics import metrics_report
from .pair_analysis import cross_matrix, segment_pairs
from .segmentation import TreeParams, segment_examples, segment_model_delta, to_dot


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse subclass that exits 1 (not 2) on bad usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".aucseg-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, path=None):
    if path:
        _write_text(path, text)
    else:
        sys.stdout.write(text)


def _json_text(payload):
    return json.dumps(jsonify(payload), indent=2, allow_nan=False) + "\n"


def _add_common(parser):
    parser.add_argument("--data", help="input table (delimited text with header)")
    parser.add_argument("--schema", help="JSON file describing the table columns")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized steps (default 0)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for data-parallel steps "
                             "(default: all cores)")
    parser.add_argument("--config", help="JSON file supplying defaults for any flag")
    parser.add_argument("--model", help="model to analyze (default: first in schema)")


def _add_tree_flags(parser):
    parser.add_argument("--dims", help="comma-separated feature names to segment on "
                                       "(default: all schema features)")
    parser.add_argument("--max-depth", type=int, default=None,
                        help="maximum tree depth (default 3)")
    parser.add_argument("--min-leaf", type=int, default=None,
                        help="minimum records per leaf (default 100; 1000 for pairs)")
    parser.add_argument("--alpha", type=float, default=None,
                        help="significance level for the false-discovery flag "
                             "(default 0.05)")
    parser.add_argument("--fit-fraction", type=float, default=None,
                        help="fraction of records used to fit the tree (default 0.5)")
    parser.add_argument("--exact-p", action="store_true", default=None,
                        help="use the exact t-distribution p-value instead of the "
                             "normal approximation")
    parser.add_argument("--dot-out", help="write the tree as Graphviz DOT")
    parser.add_argument("--json-out", help="write the full report as JSON")


def build_parser():
    parser = _Parser(prog="aucseg",
                     description="Attribute a classifier's AUC-ROC to examples and "
                                 "pairs, and segment the attributions.")
    parser.add_argument("--version", action="version", version=f"aucseg {__version__}")
    commands = parser.add_subparsers(dest="command", required=True,
                                     metavar="{metrics,attribute,segment,"
                                             "segment-delta,cross,segment-pairs}")

    sub = commands.add_parser("metrics", parents=[], help="AUC, CE loss and GINI "
                              "impurity per model, optionally per slice")
    _add_common(sub)
    sub.add_argument("--slice-by", help="categorical feature for a per-slice AUC table")
    sub.add_argument("--out", help="write the JSON report here instead of stdout")
    sub.set_defaults(func=_cmd_metrics)

    sub = commands.add_parser("attribute", help="per-example AUC attributions as CSV")
    _add_common(sub)
    sub.add_argument("--out", help="write the CSV here instead of stdout")
    sub.add_argument("--pairs-out", help="also write the per-pair credit table here")
    sub.add_argument("--max-pos", type=int, default=None,
                     help="sample at most this many positives for the pair table")
    sub.add_argument("--max-neg", type=int, default=None,
                     help="sample at most this many negatives for the pair table")
    sub.set_defaults(func=_cmd_attribute)

    sub = commands.add_parser("segment", help="tree segmentation of per-example "
                              "attributions (or deltas/pairs via --target)")
    _add_common(sub)
    _add_tree_flags(sub)
    sub.add_argument("--target", default="attribution",
                     help="attribution (default), delta:OTHER_MODEL, or pair")
    sub.add_argument("--pair-budget", type=int, default=None,
                     help="approximate pair count when --target pair (default 10000)")
    sub.set_defaults(func=_cmd_segment)

    sub = commands.add_parser("segment-delta", help="segment the attribution "
                              "difference between two models")
    _add_common(sub)
    _add_tree_flags(sub)
    sub.add_argument("--model-b", help="comparison model (default: second in schema)")
    sub.set_defaults(func=_cmd_segment_delta)

    sub = commands.add_parser("cross", help="pair statistics over category crosses "
                              "of one feature")
    _add_common(sub)
    sub.add_argument("--feature", help="feature whose categories define the crosses")
    sub.add_argument("--kind", choices=["mean", "headroom"], default="mean",
                     help="mean pair attribution or misordered-pair counts")
    sub.add_argument("--bins", type=int, default=None,
                     help="quantile-bucket count, required for numeric features")
    sub.add_argument("--csv-out", help="write the matrix as CSV")
    sub.add_argument("--svg-out", help="write the matrix as an SVG heatmap")
    sub.add_argument("--json-out", help="write the matrix as JSON")
    sub.set_defaults(func=_cmd_cross)

    sub = commands.add_parser("segment-pairs", help="tree segmentation of pair "
                              "credits over paired features")
    _add_common(sub)
    _add_tree_flags(sub)
    sub.add_argument("--pair-budget", type=int, default=None,
                     help="approximate number of pairs to sample (default 10000)")
    sub.set_defaults(func=_cmd_segment_pairs)
    return parser


def _flag_given(argv, dest):
    option = "--" + dest.replace("_", "-")
    return any(a == option or a.startswith(option + "=") for a in argv)


def _apply_config(args, argv):
    if not args.config:
        return
    with open(args.config, encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise UsageError(f"{args.config}: config must be a JSON object")
    known = vars(args)
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in ("command", "func", "config"):
            raise UsageError(f"config key {key!r} is not allowed")
        if dest not in known:
            raise UsageError(f"config key {key!r} matches no flag of "
                             f"{args.command!r}")
        if not _flag_given(argv, dest):
            setattr(args, dest, value)


def _load(args):
    if not args.data:
        raise UsageError("--data is required")
    if not args.schema:
        raise UsageError("--schema is required")
    try:
        schema = SchemaConfig.from_json_file(args.schema)
    except (KeyError, TypeError, ValueError) as error:
        if isinstance(error, json.JSONDecodeError):
            raise
        raise DataError(f"{args.schema}: invalid schema: {error}") from error
    return load_dataset(args.data, schema)


def _pick_model(dataset, name):
    if name is None:
        return dataset.schema.model_names[0]
    dataset.score_for(name)  # raises UnknownModel for a bad name
    return name


def _pick_dims(dataset, dims):
    if dims is None:
        return list(dataset.schema.feature_names)
    names = [d.strip() for d in dims.split(",") if d.strip()]
    for name in names:
        dataset.feature_kind(name)  # raises MissingColumn for a bad name
    return names


def _tree_params(args, pair_target=False):
    params = TreeParams(min_leaf_size=1000 if pair_target else 100)
    overrides = {}
    if args.max_depth is not None:
        overrides["max_depth"] = args.max_depth
    if args.min_leaf is not None:
        overrides["min_leaf_size"] = args.min_leaf
    if args.alpha is not None:
        overrides["significance_level"] = args.alpha
    if args.fit_fraction is not None:
        overrides["fit_fraction"] = args.fit_fraction
    if args.exact_p is not None:
        overrides["exact_p_value"] = bool(args.exact_p)
    return params.override(**overrides) if overrides else params


def _cmd_metrics(args):
    dataset = _load(args)
    report = metrics_report(dataset, slice_by=args.slice_by)
    _emit(_json_text(report), args.out)


def _attribution_csv(dataset, model):
    scores = dataset.score_for(model)
    totals = example_attributions(dataset, model)
    normalized = normalized_attributions(dataset, model, totals)
    lines = ["index,label,score,total,normalized"]
    for i in range(dataset.count):
        lines.append(
            f"{i},{int(dataset.labels[i])},{float(scores[i])!r},"
            f"{float(totals[i])!r},{float(normalized[i])!r}"
        )
    return "\n".join(lines) + "\n"


def _cmd_attribute(args):
    dataset = _load(args)
    model = _pick_model(dataset, args.model)
    _emit(_attribution_csv(dataset, model), args.out)
    if args.pairs_out:
        pairs = pair_attributions(dataset, model, max_pos=args.max_pos,
                                  max_neg=args.max_neg, seed=args.seed)
        lines = ["pos_index,neg_index,credit"]
        for pair in pairs:
            lines.append(f"{pair.pos_index},{pair.neg_index},{pair.credit!r}")
        _write_text(args.pairs_out, "\n".join(lines) + "\n")


def _segment_output(args, result):
    sys.stdout.write(result.report.to_text() + "\n")
    if args.json_out:
        _write_text(args.json_out, _json_text(result.report.to_json_dict()))
    if args.dot_out:
        _write_text(args.dot_out, to_dot(result.tree))


def _cmd_segment(args):
    target = args.target or "attribution"
    if target == "pair":
        return _cmd_segment_pairs(args)
    dataset = _load(args)
    model = _pick_model(dataset, args.model)
    dims = _pick_dims(dataset, args.dims)
    params = _tree_params(args)
    if target == "attribution":
        result = segment_examples(dataset, model, dims, params=params,
                                  seed=args.seed)
    elif target.startswith("delta:"):
        model_b = _pick_model(dataset, target[len("delta:"):])
        result = segment_model_delta(dataset, model, model_b, dims,
                                     params=params, seed=args.seed)
    else:
        raise UsageError(f"--target must be attribution, delta:MODEL, or pair; "
                         f"got {target!r}")
    _segment_output(args, result)


def _cmd_segment_delta(args):
    dataset = _load(args)
    model_a = _pick_model(dataset, args.model)
    model_b = args.model_b
    if model_b is None:
        names = dataset.schema.model_names
        others = [m for m in names if m != model_a]
        if not others:
            raise UsageError("--model-b is required when the schema declares "
                             "a single model")
        model_b = others[0]
    else:
        model_b = _pick_model(dataset, model_b)
    dims = _pick_dims(dataset, args.dims)
    result = segment_model_delta(dataset, model_a, model_b, dims,
                                 params=_tree_params(args), seed=args.seed)
    _segment_output(args, result)


def _cmd_segment_pairs(args):
    dataset = _load(args)
    model = _pick_model(dataset, args.model)
    dims = _pick_dims(dataset, args.dims)
    budget = args.pair_budget if args.pair_budget is not None else 10000
    result = segment_pairs(dataset, model, dims, params=_tree_params(args, True),
                           pair_budget=budget, seed=args.seed)
    _segment_output(args, result)


def _matrix_text(matrix):
    rows = []
    for category, row in zip(matrix.categories, matrix.values):
        rows.append([str(category)] +
                    ["-" if math.isnan(v) else sig3(v) for v in row])
    header = ["positive\\negative"] + [str(c) for c in matrix.categories]
    right = tuple(range(1, len(header)))
    return align_table(rows, header=header, right=right) + "\n"


def _cmd_cross(args):
    dataset = _load(args)
    model = _pick_model(dataset, args.model)
    if not args.feature:
        raise UsageError("--feature is required")
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    matrix = cross_matrix(dataset, model, args.feature, kind=args.kind,
                          bins=args.bins, threads=threads)
    sys.stdout.write(_matrix_text(matrix))
    if args.csv_out:
        _write_text(args.csv_out, matrix.to_csv())
    if args.svg_out:
        _write_text(args.svg_out, matrix.to_svg())
    if args.json_out:
        _write_text(args.json_out, _json_text(matrix.to_json_dict()))


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        args.func(args)
    except UsageError as error:
        print(f"aucseg: error: {error}", file=sys.stderr)
        return 1
    except DataError as error:
        print(f"aucseg: data error: {error}", file=sys.stderr)
        return 2
    except ComputeError as error:
        print(f"aucseg: compute error: {error}", file=sys.stderr)
        return 3
    except OSError as error:
        print(f"aucseg: data error: {error}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as error:
        print(f"aucseg: data error: {error}", file=sys.stderr)
        return 2
    return 0
