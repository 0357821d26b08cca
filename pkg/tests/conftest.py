import pytest

_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line: report("1", passed, detail)."""
    def add(criterion: str, passed: bool, detail: str = ""):
        _LINES.append((criterion, bool(passed), detail))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")
