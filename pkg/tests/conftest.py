import pytest

# criterion number -> (title, passed, detail lines); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool | None, list[str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, passed, details = ACCEPTANCE[num]
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        tr.write_line(f"{verdict}  criterion {num:>2}: {title}")
        if passed is False:
            for line in details:
                tr.write_line(f"        {line}")


@pytest.fixture
def record_criterion():
    def record(num: int, title: str, results) -> None:
        results = list(results)
        ACCEPTANCE[num] = (title, all(r.passed for r in results), [r.line() for r in results])
    return record
