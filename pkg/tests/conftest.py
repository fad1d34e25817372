import pytest

# (criterion number, passed, one-line detail), filled by the acceptance tests
ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def record():
    def _record(num: int, passed: bool, detail: str) -> None:
        ACCEPTANCE.append((num, passed, detail))
        print(f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, detail

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, passed, detail in sorted(ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"{num:>2} {'PASS' if passed else 'FAIL'}  {detail}")
