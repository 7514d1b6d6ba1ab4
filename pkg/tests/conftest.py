import json
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("levylab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("levylab")

ORACLE_FILE = Path(__file__).parent / "oracles" / "values.json"


@pytest.fixture(scope="session")
def oracle():
    return json.loads(ORACLE_FILE.read_text())


def within_se(est, target, se, k=3.0):
    return abs(est - target) <= k * se


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
