"""Shared fixtures for the exporter test suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from imagegen import make_image_tree

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for per-criterion verdict lines, echoed in the summary."""

    def record(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria (exporter)")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture()
def small_tree(tmp_path):
    """A two-class image tree plus a matching class-score table."""
    images = tmp_path / "images"
    make_image_tree(images, {"alpha": 3, "beta": 3}, seed=100)
    cps = tmp_path / "cps.csv"
    cps.write_text("class_id,cps\nalpha,61.5\nbeta,38.25\n")
    return images, cps
