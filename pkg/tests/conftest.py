import json
from pathlib import Path

import pytest

_REPORT = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_REPORT] = {}


@pytest.fixture(scope="session")
def oracles():
    return json.loads((Path(__file__).parent / "data" / "oracles.json").read_text())


@pytest.fixture
def report(request):
    """``report(n, ok, detail)`` records one acceptance line and echoes it."""
    lines = request.config.stash[_REPORT]

    def _report(n: int, ok: bool, detail: str):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[n] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
