import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (title, [(label, ok, detail), ...])
ACCEPTANCE: dict[int, tuple[str, list]] = {}
EXPECTED: set[int] = set()


class Recorder:
    def __init__(self, number: int, title: str):
        self.checks: list = []
        ACCEPTANCE[number] = (title, self.checks)

    def check(self, label: str, ok: bool, detail: str) -> bool:
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    def verdict(self) -> None:
        failed = [f"{label}: {detail}" for label, ok, detail in self.checks if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    return Recorder(marker.args[0], marker.kwargs.get("title", request.node.name))


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker:
            EXPECTED.add(marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE and not EXPECTED:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(set(ACCEPTANCE) | EXPECTED):
        if number not in ACCEPTANCE:
            terminalreporter.write_line(f"criterion {number}: FAIL (did not complete)")
            continue
        title, checks = ACCEPTANCE[number]
        ok = bool(checks) and all(c[1] for c in checks)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}")
        for label, good, detail in checks:
            terminalreporter.write_line(f"    [{'ok' if good else 'FAIL'}] {label}: {detail}")
