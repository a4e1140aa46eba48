import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ustlab.lattice import (FREE, WIRED, GridBox, RandomSource, boustrophedon, ceil_side,
                            exit_time, neighbors, path_graph, rect_graph, srw_path)


def test_random_source_replays():
    a = RandomSource(5, 3).random(10)
    b = RandomSource(5, 3).random(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RandomSource(5, 4).random(10))
    assert not np.array_equal(a, RandomSource(6, 3).random(10))


def test_random_source_spawn_matches_direct():
    assert np.array_equal(RandomSource(9).spawn(2).words(4), RandomSource(9, 2).words(4))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_random_source_rejects_bad_seed(seed):
    with pytest.raises(ValueError):
        RandomSource(seed)


def test_free_box_counts_and_lookup():
    box = GridBox(3, FREE)
    g = box.graph()
    assert g.n == 49 == box.n_vertices
    for v in range(g.n):
        assert box.node(g.point(v)) == v
    assert g.degree(box.node((0, 0))) == 4
    assert g.degree(box.node((3, 3))) == 2


def test_wired_box_aliases_boundary():
    box = GridBox(3, WIRED)
    g = box.graph()
    assert g.n == 26 == box.n_vertices
    assert box.node((3, 0)) == box.node((-3, -3)) == box.root == g.super_node
    # boundary edges of the 5x5 interior: 4 sides x 5
    assert g.degree(box.root) == 20
    assert all(g.degree(box.node((x, y))) == 4 for x in range(-2, 3) for y in range(-2, 3))


def test_box_node_outside_raises():
    with pytest.raises(ValueError):
        GridBox(2).node((3, 0))


def test_neighbors_order_and_domain():
    box = GridBox(2)
    assert neighbors(box, (0, 0)) == [(1, 0), (-1, 0), (0, 1), (0, -1)]
    assert neighbors(box, (2, 2)) == [(1, 2), (2, 1)]
    with pytest.raises(ValueError):
        neighbors(box, (5, 0))


def test_rect_and_path_graphs():
    g = rect_graph(2, 3)
    assert g.n == 6 and len(g.edges()) == 7
    p = path_graph(4)
    assert [tuple(p.point(v)) for v in range(4)] == [(0, 0), (1, 0), (2, 0), (3, 0)]


def test_contract_merges_nodes_and_keeps_multi_edges():
    g = rect_graph(2, 2)
    c = g.contract([0, 1])
    assert c.n == 3
    # each merged vertex had one edge leaving the merged set
    assert c.degree(c.super_node) == 2


@given(st.integers(0, 2**32), st.integers(1, 300))
@settings(max_examples=30, deadline=None)
def test_srw_path_unit_steps(seed, steps):
    path = srw_path((0, 0), steps, RandomSource(seed).generator)
    assert path.shape == (steps + 1, 2)
    assert np.all(np.abs(np.diff(path, axis=0)).sum(axis=1) == 1)


def test_exit_time():
    path = np.array([[0, 0], [1, 0], [2, 0], [3, 0]])
    assert exit_time(path, (0, 0), 1.5) == 2
    assert exit_time(path, (0, 0), 3) is None


@pytest.mark.parametrize("side,bc", [(1, FREE), (4, FREE), (4, WIRED), (7, WIRED)])
def test_boustrophedon_is_a_serpentine_permutation(side, bc):
    box = GridBox(side, bc)
    order = boustrophedon(box)
    g = box.graph()
    expected = [v for v in range(g.n) if v != g.super_node]
    assert sorted(order.tolist()) == expected
    pts = [g.point(v) for v in order if g.point(v) is not None]
    steps = [abs(a[0] - b[0]) + abs(a[1] - b[1]) for a, b in zip(pts, pts[1:])]
    assert max(steps) == 1


def test_ceil_side():
    assert ceil_side(2.0, 8) == 16
    assert ceil_side(1.5, 3) == 5
