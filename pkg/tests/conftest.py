import functools

import pytest

from gpecho.scenarios import get_scenario

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def run_preset(name: str):
    sc = get_scenario(name)
    return sc, sc.simulate()


@pytest.fixture(scope="session")
def preset_run():
    return run_preset


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
