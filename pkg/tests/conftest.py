import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from setrisk import (
    AdaptedVector,
    AvarMeasure,
    AvarParams,
    EntropicMeasure,
    EntropicParams,
    Polyhedron,
    ScenarioTree,
    SuperhedgingMeasure,
    VectorMeasure,
)

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def make_measure(tree, raw):
    """Normalize nonnegative per-leaf weights into a valid vector measure."""
    totals = [
        sum(tree.prob(leaf) * F(raw[leaf][i]) for leaf in tree.leaves)
        for i in range(tree.d)
    ]
    return VectorMeasure(
        tree,
        {
            leaf: tuple(F(raw[leaf][i]) / totals[i] for i in range(tree.d))
            for leaf in tree.leaves
        },
    )

BINOMIAL_NODES = [
    ("r", None, 0, None),
    ("u", "r", 1, F(1, 2)),
    ("d", "r", 1, F(1, 2)),
    ("uu", "u", 2, F(1, 2)),
    ("ud", "u", 2, F(1, 2)),
    ("du", "d", 2, F(1, 2)),
    ("dd", "d", 2, F(1, 2)),
]


@pytest.fixture(scope="session")
def twoleaf():
    return ScenarioTree(
        [("r", None, 0, None), ("a", "r", 1, F(1, 2)), ("b", "r", 1, F(1, 2))], d=1
    )


@pytest.fixture(scope="session")
def binomial_d1():
    return ScenarioTree(BINOMIAL_NODES, d=1)


@pytest.fixture(scope="session")
def binomial_d2():
    return ScenarioTree(BINOMIAL_NODES, d=2)


@pytest.fixture(scope="session")
def threeperiod_d2():
    nodes = [
        ("r", None, 0, None),
        ("a", "r", 1, F(1, 2)), ("b", "r", 1, F(1, 2)),
        ("aa", "a", 2, F(1, 3)), ("ab", "a", 2, F(2, 3)),
        ("ba", "b", 2, F(1, 2)), ("bb", "b", 2, F(1, 2)),
        ("aaa", "aa", 3, F(1, 2)), ("aab", "aa", 3, F(1, 2)),
        ("aba", "ab", 3, F(1, 4)), ("abb", "ab", 3, F(3, 4)),
        ("baa", "ba", 3, F(1, 2)), ("bab", "ba", 3, F(1, 2)),
        ("bba", "bb", 3, F(2, 5)), ("bbb", "bb", 3, F(3, 5)),
    ]
    return ScenarioTree(nodes, d=2)


@pytest.fixture(scope="session")
def bidask_cone():
    # bid-ask exchange cone: generated by (1,-1), (-1,2) on top of the orthant
    return Polyhedron.from_generators([(0, 0)], [(1, -1), (-1, 2), (1, 0), (0, 1)], dim=2)


@pytest.fixture(scope="session")
def shp_measure(binomial_d2, bidask_cone):
    return SuperhedgingMeasure(binomial_d2, {n: bidask_cone for n in binomial_d2.node_ids})


@pytest.fixture(scope="session")
def lam_half_d1(binomial_d1):
    return AvarParams.constant(binomial_d1, F(1, 2))


@pytest.fixture(scope="session")
def avar_measure(binomial_d1, lam_half_d1):
    return AvarMeasure(binomial_d1, lam_half_d1)


@pytest.fixture(scope="session")
def entropic_measure(threeperiod_d2):
    return EntropicMeasure(threeperiod_d2, EntropicParams([1.0, 2.0]))


@pytest.fixture(scope="session")
def payoff_d2(binomial_d2):
    return AdaptedVector(
        binomial_d2, 2, {"uu": (1, 0), "ud": (0, 1), "du": (2, -1), "dd": (0, 0)}
    )


@pytest.fixture(scope="session")
def payoff_d1(binomial_d1):
    return AdaptedVector(binomial_d1, 2, {"uu": (1,), "ud": (0,), "du": (-1,), "dd": (-3,)})


@pytest.fixture(scope="session")
def physical_d2(binomial_d2):
    return VectorMeasure.physical(binomial_d2)
