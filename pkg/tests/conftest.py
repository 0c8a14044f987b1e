import pytest

from maggates.config import load_config
from maggates.constants import get_species
from maggates.fields import design_five_wire
from maggates.reproduce import Context
from maggates.scenarios import build_gate_setup

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def be():
    return get_species("9Be+")


@pytest.fixture(scope="session")
def design():
    return design_five_wire(30e-6)


@pytest.fixture(scope="session")
def phiphi_setup(design):
    return build_gate_setup("phiphi", design=design)


@pytest.fixture(scope="session")
def zz_setup(design):
    return build_gate_setup("zz", design=design)


@pytest.fixture(scope="session")
def default_context():
    return Context(load_config())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split('.')[0].split()[-1])):
            terminalreporter.write_line(line)
