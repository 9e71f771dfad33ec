import pytest

from rcvaudit.datasets import FIXTURES, load_fixture
from rcvaudit.model import PreferenceProfile


def make_profile(counts, candidates=None, **kw):
    """Profile from {"A>B>C": n} shorthand."""
    ballots = {tuple(k.split(">")): v for k, v in counts.items()}
    if candidates is None:
        candidates = sorted({c for r in ballots for c in r})
    return PreferenceProfile.build(candidates, ballots, **kw)


@pytest.fixture(scope="session")
def fixtures():
    return {name: load_fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def alaska(fixtures):
    return fixtures["alaska"]


@pytest.fixture(scope="session")
def burlington(fixtures):
    return fixtures["burlington"]


@pytest.fixture(scope="session")
def pierce(fixtures):
    return fixtures["pierce"]


@pytest.fixture(scope="session")
def sf(fixtures):
    return fixtures["sf_d7"]


@pytest.fixture(scope="session")
def minneapolis(fixtures):
    return fixtures["minneapolis"]


# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
