import pytest

# (name, passed, detail) for every acceptance criterion evaluated in this session
ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion and fail the test if it does not hold."""

    def record(name, ok, detail=""):
        ACCEPTANCE.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    n_ok = sum(ok for _, ok, _ in ACCEPTANCE)
    terminalreporter.write_line(f"{n_ok}/{len(ACCEPTANCE)} criteria met")
