import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import worked_example_dataset  # noqa: E402


@pytest.fixture
def dataset():
    return worked_example_dataset()


_criterion_outcomes: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(id): acceptance criterion exercised by this test"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid = marker.args[0]
    if report.when == "setup" and report.skipped:
        _criterion_outcomes[cid] = "SKIP"
    elif report.when == "call":
        _criterion_outcomes[cid] = "PASS" if report.passed else "FAIL"


def _criterion_key(cid):
    return (cid[0], int(cid[1:]))


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for cid in sorted(_criterion_outcomes, key=_criterion_key):
        terminalreporter.write_line(f"  {cid}: {_criterion_outcomes[cid]}")
