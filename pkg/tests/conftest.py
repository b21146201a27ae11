import pytest

from smpi import corpus

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def programs():
    return {name: corpus.load(name) for name in corpus.NAMES}


@pytest.fixture(scope="session")
def p1(programs):
    return programs["p1"]


@pytest.fixture(scope="session")
def p2(programs):
    return programs["p2"]


@pytest.fixture(scope="session")
def p2sub(programs):
    return programs["p2sub"]


@pytest.fixture(scope="session")
def p3(programs):
    return programs["p3"]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
