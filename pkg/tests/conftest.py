import math
import sys

import numpy as np
import pytest
from hypothesis import settings

from qblockcode.source_model import IIDProcess, MarkovProcess, SourceModel, StateAlphabet

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

R = 1 / math.sqrt(2)
ORTHO = [[1, 0], [0, 1]]
SCHUMACHER = [[1, 0], [R, R]]
MARKOV_PARAMS = {"initial": [0.5, 0.5], "transition": [[0.9, 0.1], [0.1, 0.9]]}


def make_iid(states, probs):
    return SourceModel(StateAlphabet(np.array(states, dtype=complex)), IIDProcess(tuple(probs)))


def make_markov(states, initial, transition):
    return SourceModel(
        StateAlphabet(np.array(states, dtype=complex)),
        MarkovProcess(1, tuple(initial), tuple(tuple(r) for r in transition)),
    )


@pytest.fixture
def markov_source():
    """Orthonormal qubit alphabet, symmetric chain with P(stay)=0.9, uniform start."""
    return make_markov(ORTHO, **MARKOV_PARAMS)


@pytest.fixture
def schumacher_source():
    return make_iid(SCHUMACHER, (0.5, 0.5))


@pytest.fixture
def uniform_source():
    return make_iid(ORTHO, (0.5, 0.5))


@pytest.fixture
def deterministic_source():
    return make_iid(ORTHO, (1.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
