import pytest

from fracpow import fem
from fracpow.spectral import decompose


@pytest.fixture(scope="session")
def mesh16():
    return fem.build_mesh(16)


@pytest.fixture(scope="session")
def pair16(mesh16):
    return fem.assemble(mesh16)


@pytest.fixture(scope="session")
def decomp16(pair16):
    return decompose(pair16)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one PASS/FAIL line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
