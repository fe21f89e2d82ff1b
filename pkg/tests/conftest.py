from __future__ import annotations


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if report.when != "call":
                continue
            lines += [(report.nodeid, v) for k, v in report.user_properties if k == "criterion"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda item: int(item[1].split()[1])):
            terminalreporter.write_line(line)
