import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match or (report.when != "call" and report.passed):
        return
    number = int(match.group(1))
    ok = report.passed and _outcomes.get(number, True)
    _outcomes[number] = ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        status = "PASS" if _outcomes[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}")
