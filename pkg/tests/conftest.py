import _checks


def pytest_terminal_summary(terminalreporter):
    if _checks.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for k in sorted(_checks.ACCEPTANCE_LINES):
            terminalreporter.write_line(_checks.ACCEPTANCE_LINES[k])
