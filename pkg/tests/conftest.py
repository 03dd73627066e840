import os
import re

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=80,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.register_profile(
    "thorough", parent=settings.get_profile("default"), max_examples=1000,
)
settings.load_profile(os.environ.get("BRANCHPACK_HYPOTHESIS", "default"))

CRITERIA = {
    1: "completion equivalence, exhaustive sweep",
    2: "lower/upper/two-sided equivalence, random corpus",
    3: "solution and certificate validity",
    4: "c+-branching decomposition equivalence",
    5: "balanced root-set sizes",
    6: "uncrossing properties",
    7: "bipartite chain equivalence",
    8: "spanning packing consistency",
    9: "deterministic replay",
}
_outcomes = {}
_details = {}


@pytest.fixture
def acceptance_detail():
    """Record a one-line summary for a criterion, shown next to its verdict."""
    def record(n, text):
        _details[n] = text
    return record


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.failed:
        _outcomes[n] = "FAIL"
    elif report.when == "call" and report.passed:
        _outcomes.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, desc in CRITERIA.items():
        extra = f" [{_details[n]}]" if n in _details else ""
        terminalreporter.write_line(f"criterion {n}: {_outcomes.get(n, 'NOT RUN')} - {desc}{extra}")
