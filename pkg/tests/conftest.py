import pytest

from dodecagrid import cli


@pytest.fixture(scope="session")
def layout():
    """Cached builder output by structure name."""
    def get(name, **params):
        return cli.build_structure(name, {k: str(v) for k, v in params.items()})
    return get


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
