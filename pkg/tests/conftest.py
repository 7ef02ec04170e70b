import hypothesis
import pytest

from merotensor.cartan import GlobalParams
from merotensor.yangian_rep import ev_sl2

hypothesis.settings.register_profile("repo", max_examples=40, deadline=None, derandomize=True)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None, derandomize=True)
hypothesis.settings.load_profile("repo")

SEEDS = (0.1, 0.45 + 0.2j, -0.3 + 0.15j)


@pytest.fixture(scope="session")
def params():
    return GlobalParams()


@pytest.fixture(scope="session")
def seeds(params):
    return [ev_sl2(params, a) for a in SEEDS]


@pytest.fixture(scope="session")
def pair(seeds):
    return seeds[0], seeds[1]
