from __future__ import annotations

import json
from pathlib import Path

import pytest

from echochamber.model import DEFAULT_NUMERICS, DEFAULT_PARAMS

ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, title: str, passed: bool, measured: str) -> None:
    """Log a criterion outcome for the end-of-run table, then let the test
    assert. Recording first keeps failed criteria visible in the summary."""
    ACCEPTANCE.append((number, title, passed, measured))


@pytest.fixture(scope="session")
def oracle() -> dict:
    path = Path(__file__).parent / "data" / "oracle.json"
    return json.loads(path.read_text())


@pytest.fixture(scope="session")
def params():
    return DEFAULT_PARAMS


@pytest.fixture(scope="session")
def cfg():
    return DEFAULT_NUMERICS


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, passed, measured in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        tr.write_line(f"ACCEPTANCE {number:02d} {status} - {title}: {measured}")
    n_pass = sum(1 for entry in ACCEPTANCE if entry[2])
    tr.write_line(f"acceptance total: {n_pass}/{len(ACCEPTANCE)} criteria pass")
