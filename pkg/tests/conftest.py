import pytest

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the acceptance summary."""
    lines = request.config.stash[ACCEPTANCE]

    def record(label: str, ok: bool, detail: str) -> bool:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
