from __future__ import annotations

import time

import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Run an acceptance body, record one PASS/FAIL line, then assert."""
    def run(number: int, title: str, body, limit: float) -> None:
        start = time.perf_counter()
        error = ""
        try:
            body()
        except AssertionError as exc:
            error = str(exc).splitlines()[0] if str(exc) else "assertion failed"
        elapsed = time.perf_counter() - start
        ok = not error and elapsed < limit
        if not error and elapsed >= limit:
            error = f"took {elapsed:.2f}s, limit {limit}s"
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s)"
        if error:
            line += f" {error}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line
    return run


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
