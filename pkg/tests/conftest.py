from __future__ import annotations

import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record one acceptance verdict; printed in the terminal summary."""

    def record(criterion: int, passed: bool, detail: str) -> bool:
        _VERDICTS[criterion] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, detail = _VERDICTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {detail}")
