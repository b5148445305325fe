import pytest
from mpmath import mp

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(autouse=True)
def _working_precision():
    # reference values in tests are computed at the library default
    with mp.workprec(128):
        yield


@pytest.fixture
def acceptance_lines(request):
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
