"""Shared fixtures: a small synthesized dataset reused by pipeline/CLI tests."""

import sys
from pathlib import Path

import pytest

from texlens.synth import planted_material_spec, synth_dataset, write_dataset

sys.path.insert(0, str(Path(__file__).parent))

from blockgen import make_activation_set, random_activation_block  # noqa: F401

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for per-criterion verdict lines, echoed in the summary."""

    def record(line: str) -> None:
        print(line, flush=True)
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A written 4-class x 4-sample dataset with 6 texture classes (x3)."""
    root = tmp_path_factory.mktemp("dataset")
    spec = planted_material_spec(class_count=4, samples_per_class=4, seed=11)
    dataset = synth_dataset(spec, texture_samples_per_class=3)
    write_dataset(dataset, root)
    return root
