import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for row in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r["criterion"])):
        verdict = "PASS" if row["passed"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {row['criterion']:>2} {row['name']}: {verdict} "
            f"({row['seconds']:.1f} s)")
