import re

import pytest

# (criterion number, description, passed, detail) filled in by test_acceptance
ACCEPTANCE = []


@pytest.fixture
def criterion():
    def record(number, text, passed, detail=""):
        ACCEPTANCE.append((number, text, bool(passed), detail))
        return bool(passed)

    return record


def _order(row):
    m = re.match(r"(\d+)(.*)", str(row[0]))
    return int(m.group(1)), m.group(2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, text, passed, detail in sorted(ACCEPTANCE, key=_order):
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>4}  {text}  {detail}")
