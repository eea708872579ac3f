_criterion_lines = []


def record_criterion(line: str):
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    # capture would swallow per-test prints, so the acceptance report is
    # replayed here where the terminal is live again
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.line(line)
