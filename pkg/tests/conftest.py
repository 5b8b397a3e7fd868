"""Shared fixtures: the 6-record toy dataset, a seeded random-dataset
suite reused by several property tests, and a CLI runner."""

import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from aucseg import EvalDataset, SchemaConfig, load_dataset

DATA_DIR = Path(__file__).parent / "data"

# filled by test_acceptance, rendered after the run so the per-criterion
# lines are visible without -s
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_schema():
    return SchemaConfig.from_json_file(DATA_DIR / "toy_schema.json")


@pytest.fixture(scope="session")
def toy(toy_schema):
    return load_dataset(DATA_DIR / "toy.csv", toy_schema)


def make_random_dataset(rng):
    """One random dataset: 2..200 records, tie-heavy or grid scores, one
    categorical and one numeric feature, occasional missing values."""
    size = int(rng.integers(2, 201))
    labels = rng.integers(0, 2, size=size)
    if labels.min() == labels.max():  # force both classes
        labels[int(rng.integers(0, size))] = 1 - labels[0]
    grid = int(rng.choice([20, 1000]))
    scores = rng.integers(0, grid + 1, size=size) / grid

    k = int(rng.integers(2, 5))
    tokens = np.array(list("abcd")[:k], dtype=object)
    g = rng.choice(tokens, size=size)
    g[rng.random(size) < 0.05] = None
    x = rng.normal(0.0, 1.0, size=size)
    x[rng.random(size) < 0.05] = np.nan
    return EvalDataset.from_columns(
        labels, {"m": scores},
        numeric_features={"x": x}, categorical_features={"g": g},
    )


@pytest.fixture(scope="session")
def random_suite():
    """1000 seeded random datasets shared by the property suites."""
    rng = np.random.default_rng(42)
    return [make_random_dataset(rng) for _ in range(1000)]


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "aucseg", *[str(a) for a in args]],
        capture_output=True, cwd=cwd,
    )


@pytest.fixture()
def cli():
    return run_cli
