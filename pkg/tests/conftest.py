import numpy as np
import pytest

from maplab import WellLabeledTree, cvs_inverse, enumerate_trees


@pytest.fixture(scope="session")
def one_edge_map():
    """Two vertices joined by one edge: sigma fixes both darts."""
    from maplab import build_map

    return build_map(1, alpha=[1, 0], sigma=[0, 1], root=0)


@pytest.fixture(scope="session")
def loop_map():
    """One vertex with a loop: sigma swaps the darts."""
    from maplab import build_map

    return build_map(1, alpha=[1, 0], sigma=[1, 0], root=0)


@pytest.fixture(scope="session")
def small_instances():
    """Every (tree, eps) pair for n <= 2, with the built pointed quadrangulation."""
    out = []
    for n in (1, 2):
        for tree in enumerate_trees(n):
            for eps in (0, 1):
                out.append(cvs_inverse(tree, eps))
    return out


@pytest.fixture()
def path_tree():
    return WellLabeledTree(2, [1, 1, 0, 0], [0, 1, 2])


def sampled_trees(n, count, seed):
    from maplab import sample_uniform_tree

    rng = np.random.default_rng(seed)
    return [sample_uniform_tree(n, rng) for _ in range(count)]
