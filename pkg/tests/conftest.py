import pytest

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record one line per acceptance criterion; printed in the summary."""
    results = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, title, ok, detail=""):
        results[number] = (title, bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
