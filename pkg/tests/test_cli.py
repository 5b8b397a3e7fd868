import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from aucseg import EvalDataset, save_dataset

from conftest import DATA_DIR, run_cli

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def load_schema(name):
    with open(SCHEMA_DIR / f"{name}.schema.json", encoding="utf-8") as handle:
        return json.load(handle)


def check_schema(payload, name):
    jsonschema.validate(payload, load_schema(name))


def schema_dict(dataset):
    s = dataset.schema
    return {
        "label_column": s.label_column,
        "score_columns": [list(pair) for pair in s.score_columns],
        "feature_columns": [list(pair) for pair in s.feature_columns],
        "missing_value_token": s.missing_value_token,
    }


def write_dataset(tmp_path, dataset, stem="data"):
    data_path = tmp_path / f"{stem}.csv"
    schema_path = tmp_path / f"{stem}_schema.json"
    save_dataset(dataset, data_path)
    schema_path.write_text(json.dumps(schema_dict(dataset)), encoding="utf-8")
    return str(data_path), str(schema_path)


def planted_cli_dataset(seed=90, n=600):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    group = rng.choice(np.array(["ok", "bad"], dtype=object), n, p=[0.7, 0.3])
    base = np.where(labels == 1, 0.7, 0.3)
    flip = group == "bad"
    base[flip] = 1.0 - base[flip]
    scores = np.clip(base + rng.normal(0, 0.1, n), 0.0, 1.0)
    other = np.clip(np.where(labels == 1, 0.65, 0.35) + rng.normal(0, 0.1, n),
                    0.0, 1.0)
    return EvalDataset.from_columns(
        labels, {"m": scores, "b": other},
        numeric_features={"x": rng.normal(0, 1, n)},
        categorical_features={"g": group},
    )


@pytest.fixture(scope="module")
def planted_paths(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli_data")
    return write_dataset(tmp, planted_cli_dataset())


TOY = [
    "--data", str(DATA_DIR / "toy.csv"),
    "--schema", str(DATA_DIR / "toy_schema.json"),
]


class TestMetricsCommand:
    def test_stdout_json(self, cli):
        out = cli("metrics", *TOY)
        assert out.returncode == 0
        payload = json.loads(out.stdout)
        check_schema(payload, "metrics_report")
        assert payload["count"] == 6
        assert payload["positives"] == 3
        assert abs(payload["models"]["model"]["auc"] - 8 / 9) < 1e-12
        assert set(payload["models"]["model"]) == {"auc", "mean_ce_loss",
                                                   "mean_gini"}

    def test_slice_breakdown(self, cli):
        out = cli("metrics", *TOY, "--slice-by", "slice")
        payload = json.loads(out.stdout)
        check_schema(payload, "metrics_report")
        assert payload["slice_feature"] == "slice"
        aucs = {k: v["models"]["model"]["auc"]
                for k, v in payload["slices"].items()}
        assert aucs == {"A": 1.0, "B": 0.0, "C": 1.0}

    def test_degenerate_slice_reports_null(self, cli, tmp_path):
        data = tmp_path / "one_sided.csv"
        data.write_text("label,score,g\n1,0.9,A\n1,0.8,A\n0,0.1,B\n1,0.7,B\n",
                        encoding="utf-8")
        schema = tmp_path / "schema.json"
        schema.write_text(json.dumps({
            "label_column": "label",
            "score_columns": [["m", "score"]],
            "feature_columns": [["g", "categorical"]],
        }), encoding="utf-8")
        out = cli("metrics", "--data", data, "--schema", schema,
                  "--slice-by", "g")
        payload = json.loads(out.stdout)
        check_schema(payload, "metrics_report")
        assert payload["slices"]["A"]["models"]["m"]["auc"] is None
        assert payload["slices"]["B"]["models"]["m"]["auc"] == 1.0

    def test_out_file(self, cli, tmp_path):
        target = tmp_path / "report.json"
        out = cli("metrics", *TOY, "--out", target)
        assert out.returncode == 0
        assert out.stdout == b""
        payload = json.loads(target.read_text(encoding="utf-8"))
        assert payload["count"] == 6


class TestAttributeCommand:
    def test_stdout_csv_exact(self, cli):
        out = cli("attribute", *TOY)
        assert out.returncode == 0
        third = "0.3333333333333333"
        assert out.stdout.decode() == "\n".join([
            "index,label,score,total,normalized",
            "0,0,0.1,1.5,0.5",
            "1,1,0.5,1.5,0.5",
            f"2,0,0.3,1.0,{third}",
            f"3,1,0.2,1.0,{third}",
            "4,0,0.1,1.5,0.5",
            "5,1,0.5,1.5,0.5",
        ]) + "\n"

    def test_pairs_out(self, cli, tmp_path):
        pairs_path = tmp_path / "pairs.csv"
        out_path = tmp_path / "attr.csv"
        out = cli("attribute", *TOY, "--out", out_path,
                  "--pairs-out", pairs_path)
        assert out.returncode == 0
        lines = pairs_path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "pos_index,neg_index,credit"
        assert len(lines) == 10
        assert "3,2,0.0" in lines
        assert "1,0,1.0" in lines

    def test_sampled_pairs(self, cli, tmp_path):
        pairs_path = tmp_path / "pairs.csv"
        out = cli("attribute", *TOY, "--out", tmp_path / "a.csv",
                  "--pairs-out", pairs_path, "--max-pos", 2, "--max-neg", 2,
                  "--seed", 11)
        assert out.returncode == 0
        lines = pairs_path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 5


class TestSegmentCommand:
    def test_text_and_artifacts(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        json_path = tmp_path / "segments.json"
        dot_path = tmp_path / "segments.dot"
        out = cli("segment", "--data", data, "--schema", schema,
                  "--min-leaf", 50, "--max-depth", 2, "--seed", 7,
                  "--json-out", json_path, "--dot-out", dot_path)
        assert out.returncode == 0
        text = out.stdout.decode()
        assert "Segment" in text and "AUC Attribution" in text
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        check_schema(payload, "segment_report")
        assert payload["target"] == {"kind": "normalized_attribution",
                                     "model": "m"}
        dot = dot_path.read_text(encoding="utf-8")
        assert dot.startswith("digraph")

    def test_target_delta_matches_segment_delta(self, cli, tmp_path,
                                                planted_paths):
        data, schema = planted_paths
        common = ["--data", data, "--schema", schema, "--min-leaf", 50,
                  "--max-depth", 2, "--seed", 3]
        a_json = tmp_path / "a.json"
        b_json = tmp_path / "b.json"
        via_target = cli("segment", *common, "--target", "delta:b",
                         "--json-out", a_json)
        via_command = cli("segment-delta", *common, "--model-b", "b",
                          "--json-out", b_json)
        assert via_target.returncode == 0
        assert via_command.returncode == 0
        assert via_target.stdout == via_command.stdout
        assert a_json.read_bytes() == b_json.read_bytes()
        payload = json.loads(a_json.read_text(encoding="utf-8"))
        check_schema(payload, "segment_report")
        assert payload["target"]["kind"] == "delta_attribution"

    def test_segment_delta_defaults_to_other_model(self, cli, planted_paths):
        data, schema = planted_paths
        out = cli("segment-delta", "--data", data, "--schema", schema,
                  "--min-leaf", 50, "--max-depth", 1)
        assert out.returncode == 0

    def test_delta_needs_second_model(self, cli):
        out = cli("segment-delta", *TOY, "--min-leaf", 1)
        assert out.returncode == 1
        assert b"--model-b" in out.stderr

    def test_target_pair_matches_segment_pairs(self, cli, planted_paths):
        data, schema = planted_paths
        common = ["--data", data, "--schema", schema, "--min-leaf", 300,
                  "--max-depth", 2, "--pair-budget", 2500, "--seed", 5]
        via_target = cli("segment", *common, "--target", "pair")
        via_command = cli("segment-pairs", *common)
        assert via_target.returncode == 0
        assert via_target.stdout == via_command.stdout

    def test_bad_target_rejected(self, cli, planted_paths):
        data, schema = planted_paths
        out = cli("segment", "--data", data, "--schema", schema,
                  "--target", "bogus")
        assert out.returncode == 1
        assert b"--target" in out.stderr

    def test_too_few_records_is_compute_error(self, cli):
        out = cli("segment", *TOY)
        assert out.returncode == 3


class TestSegmentPairsCommand:
    def test_report_and_schema(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        json_path = tmp_path / "pairs.json"
        out = cli("segment-pairs", "--data", data, "--schema", schema,
                  "--pair-budget", 2500, "--min-leaf", 300, "--max-depth", 2,
                  "--seed", 5, "--json-out", json_path)
        assert out.returncode == 0
        text = out.stdout.decode()
        assert "Negative Slice" in text and "Positive Slice" in text
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        check_schema(payload, "pair_segment_report")
        assert payload["fit_count"] + payload["est_count"] == 2500


class TestCrossCommand:
    def test_stdout_table_and_files(self, cli, tmp_path):
        csv_path = tmp_path / "m.csv"
        svg_path = tmp_path / "m.svg"
        json_path = tmp_path / "m.json"
        out = cli("cross", *TOY, "--feature", "slice",
                  "--csv-out", csv_path, "--svg-out", svg_path,
                  "--json-out", json_path)
        assert out.returncode == 0
        table = out.stdout.decode()
        assert table.splitlines()[0].startswith("positive\\negative")
        csv_lines = csv_path.read_text(encoding="utf-8").strip().split("\n")
        assert csv_lines[0] == "positive\\negative,A,B,C"
        assert csv_lines[2] == "B,1.0,0.0,1.0"
        assert svg_path.read_text(encoding="utf-8").startswith("<svg")
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        check_schema(payload, "cross_matrix")
        assert payload["values"][1][1] == 0.0

    def test_headroom_kind(self, cli, tmp_path):
        json_path = tmp_path / "h.json"
        out = cli("cross", *TOY, "--feature", "slice", "--kind", "headroom",
                  "--json-out", json_path)
        assert out.returncode == 0
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        check_schema(payload, "cross_matrix")
        assert payload["kind"] == "incorrect_pair_count"
        assert payload["values"][1][1] == 1.0

    def test_numeric_needs_bins(self, cli, planted_paths):
        data, schema = planted_paths
        out = cli("cross", "--data", data, "--schema", schema,
                  "--feature", "x")
        assert out.returncode == 3
        binned = cli("cross", "--data", data, "--schema", schema,
                     "--feature", "x", "--bins", 3)
        assert binned.returncode == 0

    def test_feature_required(self, cli):
        out = cli("cross", *TOY)
        assert out.returncode == 1
        assert b"--feature" in out.stderr

    def test_threads_do_not_change_output(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        outputs = []
        for threads in (1, 2, 4):
            json_path = tmp_path / f"t{threads}.json"
            out = cli("cross", "--data", data, "--schema", schema,
                      "--feature", "g", "--threads", threads,
                      "--json-out", json_path)
            assert out.returncode == 0
            outputs.append((out.stdout, json_path.read_bytes()))
        assert outputs[0] == outputs[1] == outputs[2]


class TestConfigFile:
    def test_config_reaches_tree_params(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        plain = cli("segment", "--data", data, "--schema", schema)
        assert plain.returncode == 0
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"min-leaf": 5000}), encoding="utf-8")
        out = cli("segment", "--data", data, "--schema", schema,
                  "--config", config)
        assert out.returncode == 3  # 600 records cannot fill 5000-row leaves

    def test_config_value_used(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"model": "nosuch"}), encoding="utf-8")
        out = cli("attribute", "--data", data, "--schema", schema,
                  "--config", config)
        assert out.returncode == 3
        assert b"nosuch" in out.stderr

    def test_flag_beats_config(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"model": "nosuch"}), encoding="utf-8")
        out = cli("attribute", "--data", data, "--schema", schema,
                  "--config", config, "--model", "m")
        assert out.returncode == 0

    def test_unknown_key_rejected(self, cli, tmp_path, planted_paths):
        data, schema = planted_paths
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"wibble": 3}), encoding="utf-8")
        out = cli("metrics", "--data", data, "--schema", schema,
                  "--config", config)
        assert out.returncode == 1
        assert b"wibble" in out.stderr

    def test_key_for_other_command_rejected(self, cli, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"slice-by": "slice"}), encoding="utf-8")
        out = cli("attribute", *TOY, "--config", config)
        assert out.returncode == 1

    def test_config_must_be_object(self, cli, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("[1, 2]", encoding="utf-8")
        out = cli("metrics", *TOY, "--config", config)
        assert out.returncode == 1

    def test_config_invalid_json(self, cli, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("{not json", encoding="utf-8")
        out = cli("metrics", *TOY, "--config", config)
        assert out.returncode == 2

    def test_config_file_missing(self, cli, tmp_path):
        out = cli("metrics", *TOY, "--config", tmp_path / "absent.json")
        assert out.returncode == 2


class TestErrorExits:
    def test_unknown_subcommand(self, cli):
        out = run_cli("frobnicate")
        assert out.returncode == 1

    def test_no_arguments(self, cli):
        out = run_cli()
        assert out.returncode == 1

    def test_missing_data_flag(self, cli):
        out = cli("metrics", "--schema", DATA_DIR / "toy_schema.json")
        assert out.returncode == 1
        assert b"--data" in out.stderr

    def test_missing_data_file(self, cli, tmp_path):
        out = cli("metrics", "--data", tmp_path / "absent.csv",
                  "--schema", DATA_DIR / "toy_schema.json")
        assert out.returncode == 2

    def test_invalid_schema_json(self, cli, tmp_path):
        schema = tmp_path / "schema.json"
        schema.write_text("{oops", encoding="utf-8")
        out = cli("metrics", "--data", DATA_DIR / "toy.csv",
                  "--schema", schema)
        assert out.returncode == 2

    def test_schema_missing_required_key(self, cli, tmp_path):
        schema = tmp_path / "schema.json"
        schema.write_text(json.dumps({"label_column": "label"}),
                          encoding="utf-8")
        out = cli("metrics", "--data", DATA_DIR / "toy.csv",
                  "--schema", schema)
        assert out.returncode == 2

    def test_bad_label_value(self, cli, tmp_path):
        data = tmp_path / "bad.csv"
        data.write_text("label,score,slice\n2,0.5,A\n0,0.4,B\n",
                        encoding="utf-8")
        out = cli("metrics", "--data", data,
                  "--schema", DATA_DIR / "toy_schema.json")
        assert out.returncode == 2

    def test_unknown_model(self, cli):
        out = cli("attribute", *TOY, "--model", "zzz")
        assert out.returncode == 3
        assert b"zzz" in out.stderr

    def test_unknown_dims_feature(self, cli, planted_paths):
        data, schema = planted_paths
        out = cli("segment", "--data", data, "--schema", schema,
                  "--dims", "nope", "--min-leaf", 50)
        assert out.returncode == 2

    def test_version(self, cli):
        out = run_cli("--version")
        assert out.returncode == 0
        assert out.stdout.decode().startswith("aucseg ")

    def test_help(self, cli):
        out = run_cli("--help")
        assert out.returncode == 0
        assert b"metrics" in out.stdout


class TestAtomicWrites:
    def test_no_file_in_missing_directory(self, cli, tmp_path):
        target = tmp_path / "nodir" / "report.json"
        out = cli("metrics", *TOY, "--out", target)
        assert out.returncode == 2
        assert not target.exists()
        assert not (tmp_path / "nodir").exists()

    def test_failure_leaves_no_artifacts(self, cli, tmp_path):
        json_path = tmp_path / "segments.json"
        out = cli("segment", *TOY, "--json-out", json_path)
        assert out.returncode == 3
        assert not json_path.exists()
        assert list(tmp_path.iterdir()) == []

    def test_overwrite_is_clean(self, cli, tmp_path):
        target = tmp_path / "report.json"
        target.write_text("old", encoding="utf-8")
        out = cli("metrics", *TOY, "--out", target)
        assert out.returncode == 0
        payload = json.loads(target.read_text(encoding="utf-8"))
        assert payload["count"] == 6
        assert [p.name for p in tmp_path.iterdir()] == ["report.json"]
