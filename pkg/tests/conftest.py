import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import strategies as st

from rumorsource import _pykernels
from rumorsource.graph import Graph, load_edge_list

try:
    from rumorsource import _ckernels
except ImportError:  # extension not built
    _ckernels = None

FIXTURES = resources.files("rumorsource") / "fixtures"

ACCEPTANCE_LINES: list[str] = []


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def read_ids(name: str) -> list[int]:
    with open(fixture_path(name)) as fh:
        return [int(s) for s in fh if s.strip() and not s.startswith("#")]


@pytest.fixture
def spider():
    return load_edge_list(fixture_path("spider.edges")), read_ids("spider.infected")


@pytest.fixture
def fork():
    return load_edge_list(fixture_path("fork.edges")), read_ids("fork.infected")


def tree_from_parents(parents, offset=0) -> Graph:
    """Node i+1 hangs from parents[i] (which is <= i)."""
    n = len(parents) + 1
    if n == 1:
        return Graph.from_edges([], nodes=[offset])
    return Graph.from_edges([(p + offset, i + 1 + offset) for i, p in enumerate(parents)])


@st.composite
def trees(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    parents = [draw(st.integers(0, i)) for i in range(n - 1)]
    return tree_from_parents(parents)


def random_tree_graph(rng: np.random.Generator, n: int) -> Graph:
    parents = [int(rng.integers(0, i + 1)) for i in range(n - 1)]
    # shuffle labels so that ids carry no structure
    perm = rng.permutation(n)
    if n == 1:
        return Graph.from_edges([], nodes=[int(perm[0])])
    return Graph.from_edges([(int(perm[p]), int(perm[i + 1])) for i, p in enumerate(parents)])


BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="compiled"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def ln_fact(n):
    return math.lgamma(n + 1)
