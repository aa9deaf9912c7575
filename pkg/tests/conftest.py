import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    The test calls the returned function with a short detail string once its
    checks have run; a test that raises before that is reported as FAIL.
    """
    number = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": None}

    def record(detail):
        state["detail"] = detail

    yield record
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    status = "FAIL" if failed or state["detail"] is None else "PASS"
    line = f"criterion {number:>2}: {status}  {state['detail'] or ''}".rstrip()
    ACCEPTANCE_LINES.append((number, line))
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item.rep_call = report


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
