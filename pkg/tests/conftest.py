from __future__ import annotations

import time

import pytest

ACCEPTANCE_LINES: list[str] = []
SUITE_BUDGET_S = 120.0


def pytest_sessionstart(session):
    session.config._causal_locus_t0 = time.perf_counter()


@pytest.fixture
def accept():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""

    def record(criterion: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - config._causal_locus_t0
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"{'PASS' if ok else 'FAIL'} criterion 9 (suite runtime): {elapsed:.1f} s for this session "
        f"(budget {SUITE_BUDGET_S:.0f} s)"
    )
