import numpy as np
import pytest
from hypothesis import settings

from fairbreak.classifiers import LinearClassifier
from fairbreak.distributions import example1_distribution

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def worked_target():
    """The target boundary of the worked example: 0.5 x1 + x2 >= 0.25."""
    return LinearClassifier((0.5, 1.0), -0.25)


@pytest.fixture
def example1():
    # an even resolution puts no cell center on the target boundary
    return example1_distribution(20)


def random_mass(rng, k):
    m = rng.random((k, 2, 2))
    return m / m.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance(request):
    """``report(number, title, ok, detail)`` prints and records one verdict line."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def report(number, title, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        lines.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
