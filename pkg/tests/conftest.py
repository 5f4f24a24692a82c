import pytest

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[criterion] = (ok, detail)
        print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
