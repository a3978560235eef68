import pytest

from edsym.extalg import Chart
from edsym.frontend.build import load_problem
from edsym.frontend.corpus import path


def corpus(name):
    return load_problem(path(name).read_text(encoding="utf-8"))


HEAT_ROLES = {"x": "independent", "t": "independent", "u": "dependent", "w": "prolonged"}


@pytest.fixture(scope="session")
def heat():
    return corpus("heat-I")


@pytest.fixture(scope="session")
def heat_prime():
    return corpus("heat-Iprime")


@pytest.fixture
def heat_chart():
    return Chart.of("x", "t", "u", "w", roles=HEAT_ROLES)
