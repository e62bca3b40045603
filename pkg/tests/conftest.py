import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphonlab.graphs import LabelledGraph


@pytest.fixture
def k3():
    return LabelledGraph.complete(3)


@pytest.fixture
def edge():
    return LabelledGraph.complete(2)


@pytest.fixture
def p3():
    return LabelledGraph.path(3)


def all_labelled_graphs(n: int):
    """Every labelled graph on [n], by edge-subset enumeration."""
    import itertools

    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    out = []
    for r in range(len(pairs) + 1):
        for subset in itertools.combinations(pairs, r):
            out.append(LabelledGraph.from_edges(n, subset))
    return out
