from acceptance_registry import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, line = RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}  {line}")
