"""Shared fixtures, plus a terminal section for the acceptance checklist."""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Recorder for one acceptance-checklist line per criterion."""

    def _record(num: int, ok: bool, detail: str):
        _ACCEPTANCE_LINES.append((num, bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(_ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:02d} [{status}] {detail}")
