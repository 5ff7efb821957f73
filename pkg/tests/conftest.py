def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import OUTCOMES
    except ImportError:
        return
    if not OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(OUTCOMES):
        terminalreporter.write_line(OUTCOMES[num])
