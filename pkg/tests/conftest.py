import numpy as np
import pytest

from ustlab.lattice import RandomSource, rect_graph
from ustlab.wilson import sample_ust, wilson


def grid_tree(rows, cols, seed, root=0):
    """Uniform spanning tree of a free rectangular grid."""
    return wilson(rect_graph(rows, cols), root, rng=RandomSource(seed).generator)


@pytest.fixture(scope="session")
def ust32():
    return sample_ust(32, 2.0, RandomSource(11).generator, seed=11)


@pytest.fixture(scope="session")
def ust_many():
    return [sample_ust(16, 2.0, RandomSource(3, i).generator, seed=3) for i in range(20)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tree_from_edges(graph, edges, root, **kw):
    """SpanningTree from an explicit edge list (breadth-first orientation)."""
    import networkx as nx

    from ustlab.tree import SpanningTree

    G = nx.Graph(list(map(tuple, edges)))
    G.add_nodes_from(range(graph.n))
    parent = np.arange(graph.n)
    for a, b in nx.bfs_edges(G, root):
        parent[b] = a
    return SpanningTree(graph, parent, root, **kw)


def serpentine_tree(side, window=None):
    """Hamiltonian serpentine path through the free box, rooted at the origin."""
    from ustlab.lattice import FREE, GridBox, boustrophedon

    box = GridBox(side, FREE)
    order = boustrophedon(box)
    return tree_from_edges(box.graph(), zip(order[:-1], order[1:]), box.node((0, 0)), box=box,
                           window=window)


def comb_tree(side, window=None):
    """Spine along the x-axis with a vertical tooth at every x."""
    from ustlab.lattice import FREE, GridBox

    box = GridBox(side, FREE)
    edges = []
    for x in range(-side, side + 1):
        if x < side:
            edges.append((box.node((x, 0)), box.node((x + 1, 0))))
        for y in range(-side, side):
            edges.append((box.node((x, y)), box.node((x, y + 1))))
    return tree_from_edges(box.graph(), edges, box.node((0, 0)), box=box, window=window)
