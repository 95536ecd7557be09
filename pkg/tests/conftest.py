import re
from collections import defaultdict

import numpy as np
import pytest

# criterion number -> {part name: passed}
_CRITERIA = defaultdict(dict)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    parts = _CRITERIA[int(m.group(1))]
    name = m.group(2)
    if report.failed:
        parts[name] = False
    elif report.when == "call":
        parts.setdefault(name, not report.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        parts = _CRITERIA[num]
        ok = all(parts.values())
        detail = ", ".join(f"{name.replace('_', ' ')} {'ok' if p else 'FAILED'}" for name, p in parts.items())
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
