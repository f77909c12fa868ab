import numpy as np
import pytest

from eetsim import BathSpec, Drude, SimulationConfig, diagonalize, fmo_preset, overlap_products

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fmo():
    return fmo_preset()


@pytest.fixture(scope="session")
def fmo_eig(fmo):
    return diagonalize(fmo)


@pytest.fixture(scope="session")
def fmo_overlap(fmo_eig):
    return overlap_products(fmo_eig)


@pytest.fixture(scope="session")
def drude35():
    return Drude.from_cutoff_time(35.0, 50.0)


def make_config(temperature=77.0, site=1, mode="full", sd=None, correlation=None, **time):
    sd = sd or Drude.from_cutoff_time(35.0, 50.0)
    c = np.eye(7) if correlation is None else correlation
    return SimulationConfig(fmo_preset(), BathSpec(temperature, sd, c), site, mode=mode, **time)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
