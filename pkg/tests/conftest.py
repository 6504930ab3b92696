import pytest

ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def record():
    """Store one summary line per acceptance criterion."""

    def _record(name: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[name] = f"{name} {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE[name])
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[name])
