from __future__ import annotations

import sys
from pathlib import Path

import pytest

from ruleblocks import caseimport
from ruleblocks.rulemodel import default_registry
from ruleblocks.selectors import BUILTIN_SELECTORS

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
DATA = TESTS / "data"
FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "golden"

sys.path.insert(0, str(TESTS))
sys.path.insert(0, str(ROOT / "tools"))  # fixture builders


def full_registry():
    """Built-ins, the case-import extensions, and the example-only selector
    name used by the grammar snippets (bound to the start-node selector)."""
    registry = default_registry()
    caseimport.register(registry)
    registry.register_selector("example.selectors.StartingNodeSelector", BUILTIN_SELECTORS["start"][0])
    return registry


@pytest.fixture
def registry():
    return full_registry()


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion

_CRITERIA: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _CRITERIA.setdefault(number, {"title": title, "outcomes": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for number, entry in _CRITERIA.items():
        if f"criterion{number}_" in report.nodeid:
            entry["outcomes"].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        status = "PASS" if outcomes and all(outcomes) else "FAIL"
        terminalreporter.write_line(
            f"criterion {number}: {status}  {entry['title']} ({sum(outcomes)}/{len(outcomes)} checks)"
        )


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
