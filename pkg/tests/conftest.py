"""Shared fixtures.

``acceptance`` collects one verdict per acceptance criterion; the verdicts are
printed as a block at the end of the run (and immediately, under ``-s``).
"""

from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


class _Recorder:
    def __init__(self, number, title):
        self.number, self.title = number, title
        entry = _RESULTS.setdefault(number, {"title": title, "checks": []})
        self.checks = entry["checks"]

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail, "run"))
        print(f"[criterion {self.number}] {name}: {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)

    def not_evaluated(self, name, reason):
        self.checks.append((name, False, reason, "skip"))
        pytest.skip(reason)


@pytest.fixture
def acceptance(request):
    marker = request.node.get_closest_marker("criterion")
    return _Recorder(*marker.args)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, entry in sorted(_RESULTS.items()):
        checks = entry["checks"]
        skipped = [c for c in checks if c[3] == "skip"]
        failed = [c for c in checks if c[3] == "run" and not c[1]]
        verdict = "FAIL" if failed else ("PASS" if not skipped else "PARTIAL")
        tr.write_line(f"{number:>2}. {verdict:<7} {entry['title']}")
        for name, ok, detail, kind in checks:
            state = "not evaluated" if kind == "skip" else ("pass" if ok else "FAIL")
            tr.write_line(f"      {state:<13} {name}: {detail}")
