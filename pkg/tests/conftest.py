import pytest

_REPORT = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the terminal summary prints them all."""

    def record(number, name, ok, detail=""):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        _REPORT.append((number, f"[{status}] criterion {number:>2}: {name}" + (f" ({detail})" if detail else "")))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_REPORT, key=lambda r: r[0]):
        terminalreporter.write_line(line)
