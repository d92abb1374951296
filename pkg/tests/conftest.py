import numpy as np
import pytest

# (criterion, passed, detail) tuples filled in by test_acceptance.py
ACCEPTANCE = []


def record(criterion, passed, detail):
    ACCEPTANCE.append((criterion, bool(passed), detail))
    print(f"{criterion}: {'PASS' if passed else 'FAIL'} | {detail}")
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'} | {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
