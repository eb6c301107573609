# Collects acceptance results so the terminal summary shows one line per criterion.
ACCEPTANCE_LINES: dict[str, list] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[1])):
        checks = ACCEPTANCE_LINES[criterion]
        ok = all(c.passed for c in checks)
        detail = "; ".join(f"{c.name.split(' ', 1)[1]}={c.value:.4g} (bound {c.bound:.4g})" for c in checks)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
