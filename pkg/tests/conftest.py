import helpers


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in helpers.ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
