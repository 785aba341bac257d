"""Echo acceptance verdict lines past pytest's output capture."""

import sys


def pytest_terminal_summary(terminalreporter):
    mod = (sys.modules.get("tests.test_acceptance")
           or sys.modules.get("test_acceptance"))
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in mod.VERDICTS:
        terminalreporter.write_line(line)
