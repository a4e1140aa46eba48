import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ustlab.estimators import chi_square_uniform
from ustlab.lattice import GridBox, RandomSource, rect_graph, WIRED
from ustlab.wilson import (StepBudgetExceeded, count_spanning_trees, lerw_lengths, lerw_to_radius,
                           loop_erase, sample_ust, wilson, wilson_batch)

from oracles import loop_erase_quadratic, spanning_trees_brute


def _walk(seed, steps):
    rng = np.random.default_rng(seed)
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])[rng.integers(0, 4, steps)]
    return np.vstack([[0, 0], np.cumsum(moves, axis=0)])


@given(st.integers(0, 2**32), st.integers(0, 400))
@settings(max_examples=60, deadline=None)
def test_loop_erase_matches_quadratic_oracle(seed, steps):
    w = _walk(seed, steps)
    out = loop_erase(w)
    assert np.array_equal(out, loop_erase_quadratic(w))
    assert len({tuple(p) for p in out.tolist()}) == len(out)
    assert tuple(out[0]) == (0, 0) and tuple(out[-1]) == tuple(w[-1])


def test_loop_erase_keeps_self_avoiding_walk():
    w = np.array([[0, 0], [1, 0], [1, 1], [2, 1]])
    assert np.array_equal(loop_erase(w), w)


def test_loop_erase_drops_a_square_loop():
    w = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0), (-1, 0)]
    assert loop_erase(w).tolist() == [[0, 0], [-1, 0]]


def test_wilson_output_is_spanning_tree():
    g = rect_graph(5, 7)
    t = wilson(g, 3, rng=RandomSource(1).generator)
    assert t.validate()
    assert len(t.edge_set()) == g.n - 1
    assert t.root == 3


def test_wilson_with_several_roots_contracts():
    g = rect_graph(3, 3)
    t = wilson(g, [0, 8], rng=RandomSource(1).generator)
    assert t.n == 8 and t.root == t.graph.super_node
    t.validate()


def test_wilson_budget():
    box = GridBox(30, WIRED)
    with pytest.raises(StepBudgetExceeded):
        wilson(box, box.root, rng=RandomSource(0).generator, budget=3)


def _tree_counts(g, count, seed, order=None):
    parents = wilson_batch(g, 0, count, RandomSource(seed).generator, order)
    keys = Counter(map(bytes, parents.astype(np.int8)))
    return keys


def test_brute_force_tree_counts():
    assert len(spanning_trees_brute(rect_graph(2, 2))) == 4
    assert len(spanning_trees_brute(rect_graph(2, 3))) == 15
    assert count_spanning_trees((2, 3)) == 15
    assert count_spanning_trees(rect_graph(3, 3)) == 192
    assert count_spanning_trees((1, 5)) == 1


def test_count_spanning_trees_matches_float_determinant():
    g = rect_graph(4, 5)
    L = g.laplacian()
    assert count_spanning_trees(g) == round(np.linalg.det(L[1:, 1:]))


def test_count_spanning_trees_wired_box():
    # wired side-2 box: 3x3 interior plus a super node with multi-edges
    box = GridBox(2, WIRED)
    L = box.graph().laplacian()
    assert count_spanning_trees(box) == round(np.linalg.det(L[:-1, :-1]))


def test_wilson_uniform_on_2x3():
    g = rect_graph(2, 3)
    counts = _tree_counts(g, 15000, 2)
    assert len(counts) == 15
    _, p = chi_square_uniform(list(counts.values()))
    assert p > 1e-3


def test_wilson_law_does_not_depend_on_order():
    g = rect_graph(2, 3)
    a = _tree_counts(g, 15000, 3)
    b = _tree_counts(g, 15000, 4, order=np.arange(g.n)[::-1].copy())
    keys = sorted(set(a) | set(b))
    table = np.array([[a[k] for k in keys], [b[k] for k in keys]])
    assert stats.chi2_contingency(table).pvalue > 1e-3


def test_batch_matches_single_calls_in_law():
    g = rect_graph(2, 2)
    counts = _tree_counts(g, 4000, 5)
    assert len(counts) == 4


def test_lerw_to_radius_shape():
    r = 10
    path = lerw_to_radius(r, 2.0, RandomSource(1).generator)
    d2 = (path ** 2).sum(axis=1)
    assert tuple(path[0]) == (0, 0)
    assert d2[-1] > r * r and np.all(d2[:-1] <= r * r)
    assert np.all(np.abs(np.diff(path, axis=0)).sum(axis=1) == 1)
    assert len({tuple(p) for p in path.tolist()}) == len(path)
    assert len(path) - 1 >= r


def test_lerw_lengths_replays_single_calls():
    a = lerw_lengths(6, 3, 2.0, RandomSource(8).generator)
    g = RandomSource(8).generator
    b = [len(lerw_to_radius(6, 2.0, g)) - 1 for _ in range(3)]
    assert a.tolist() == b


def test_lerw_radius_below_one_rejected():
    with pytest.raises(ValueError):
        lerw_to_radius(0.5)


def test_lerw_fractional_radius_threshold():
    # r = 1.5: first exit is the first point with x^2 + y^2 > 2.25
    for s in range(20):
        p = lerw_to_radius(1.5, 4.0, RandomSource(s).generator)
        assert (p[-1] ** 2).sum() >= 3
        assert np.all((p[:-1] ** 2).sum(axis=1) <= 2)


def test_sample_ust_rooted_at_origin():
    t = sample_ust(6, 2.0, RandomSource(4).generator, seed=4)
    assert t.root == t.node((0, 0))
    assert t.window == 6 and t.box.side == 12
    assert t.validate()


def test_sample_ust_deterministic():
    a = sample_ust(5, 2.0, RandomSource(9).generator)
    b = sample_ust(5, 2.0, RandomSource(9).generator)
    assert a == b
