import pytest

from renewalloc import DEFAULT_PARAMS

_ACCEPTANCE: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> bool:
    _ACCEPTANCE.append(f"{criterion}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
    return ok


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return DEFAULT_PARAMS
