import pytest

# criterion number -> [(passed, detail), ...]; filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(num: int, passed: bool, detail: str):
        ACCEPTANCE.setdefault(num, []).append((bool(passed), detail))
        print(f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        for passed, detail in ACCEPTANCE[num]:
            terminalreporter.write_line(
                f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
