"""Prints a per-criterion verdict section after runs that touch the
acceptance suite; regular capture would otherwise swallow those lines."""

_acceptance_outcomes: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py::test_criterion" not in report.nodeid:
        return
    _acceptance_outcomes[report.nodeid] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, duration) in sorted(_acceptance_outcomes.items()):
        name = nodeid.split("::", 1)[1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{name}: {verdict} ({duration:.1f}s)")
