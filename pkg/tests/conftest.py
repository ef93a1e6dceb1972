def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[cid])
