import pytest

_RESULTS = []


class Recorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __call__(self, name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        _RESULTS.append(line)
        print(line)
        return ok


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
