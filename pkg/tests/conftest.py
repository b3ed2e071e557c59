import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def criterion_line():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        verdict = "PASS" if ok else "FAIL"
        _LINES[number] = f"criterion {number:2d} {verdict}  {title}" + (f"  ({detail})" if detail else "")

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
