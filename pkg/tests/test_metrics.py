import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ustlab.constants import D_F, KAPPA
from ustlab.metrics import (ball_inclusion_stats, ball_profile, ball_stats_rows, covering_number,
                            diameter_sq, intrinsic_ball, intrinsic_distance, pair_metrics,
                            schramm_distance, schramm_distance_sq, tree_path,
                            uniform_volume_check)
from ustlab.lattice import path_graph, rect_graph
from ustlab.tree import TruncationError

from conftest import comb_tree, grid_tree, serpentine_tree, tree_from_edges
from oracles import bfs_distance, min_cover_path, pairwise_diam2, tree_nx


def test_trivial_paths(ust32):
    t = ust32
    v = t.node((3, 2))
    assert tree_path(t, v, v).vertices.tolist() == [v]
    p = int(t.parent[v])
    path = tree_path(t, v, p)
    assert path.length == 1 and intrinsic_distance(t, v, p) == 1


def test_path_is_parent_child_chain(ust32):
    t = ust32
    rng = np.random.default_rng(0)
    for _ in range(50):
        x, y = (t.node(tuple(q)) for q in rng.integers(-20, 21, (2, 2)))
        vs = tree_path(t, x, y).vertices
        assert vs[0] == x and vs[-1] == y
        assert len(set(vs.tolist())) == len(vs)
        for a, b in zip(vs[:-1], vs[1:]):
            assert t.parent[a] == b or t.parent[b] == a


def test_intrinsic_distance_matches_bfs_oracle():
    for s in range(20):
        t = grid_tree(7 + s % 4, 9, s, root=s % 30)
        rng = np.random.default_rng(s)
        for x, y in rng.integers(0, t.n, (10, 2)):
            assert intrinsic_distance(t, x, y) == bfs_distance(t, int(x), int(y))


def test_out_of_domain_vertex():
    t = grid_tree(3, 3, 0)
    with pytest.raises(ValueError):
        intrinsic_distance(t, 0, 99)


def test_schramm_examples():
    t = tree_from_edges(path_graph(6), [(i, i + 1) for i in range(5)], 0)
    assert schramm_distance(t, 0, 5) == 5
    L = tree_from_edges(rect_graph(2, 2), [(0, 1), (1, 3), (0, 2)], 0)
    assert schramm_distance(L, 0, 3) == pytest.approx(math.sqrt(2), rel=1e-15)


@given(st.integers(0, 2**32), st.integers(1, 1000))
@settings(max_examples=60, deadline=None)
def test_calipers_match_pairwise_oracle(seed, n):
    pts = np.random.default_rng(seed).integers(-50, 51, (n, 2))
    assert diameter_sq(pts) == pairwise_diam2(pts)


def test_calipers_on_degenerate_sets():
    assert diameter_sq([[0, 0]]) == 0
    assert diameter_sq([[1, 1]] * 5) == 0
    assert diameter_sq([[0, 0], [1, 0], [2, 0], [5, 0]]) == 25


def test_calipers_on_real_tree_paths(ust32):
    t = ust32
    rng = np.random.default_rng(1)
    for _ in range(40):
        x, y = (t.node(tuple(q)) for q in rng.integers(-30, 31, (2, 2)))
        vs = tree_path(t, x, y).vertices
        if not t.has_coord[vs].all():
            continue
        exact = pairwise_diam2(t.coords[vs])
        assert schramm_distance_sq(t, x, y) == exact
        assert math.isclose(schramm_distance(t, x, y), math.sqrt(exact), rel_tol=1e-12)


def test_metric_sandwich_and_axioms(ust32):
    t = ust32
    rng = np.random.default_rng(2)
    pts = rng.integers(-25, 26, (60, 2))
    vs = [t.node(tuple(p)) for p in pts]
    for x, y, z in rng.integers(0, len(vs), (200, 3)):
        a, b, c = vs[x], vs[y], vs[z]
        du = lambda u, w: intrinsic_distance(t, u, w)
        ds = lambda u, w: schramm_distance(t, u, w)
        try:
            dab, dbc, dac = ds(a, b), ds(b, c), ds(a, c)
        except ValueError:
            continue
        assert du(a, b) == du(b, a) and dab == ds(b, a)
        assert du(a, c) <= du(a, b) + du(b, c)
        assert dac <= dab + dbc + 1e-12
        de = math.dist(t.point(a), t.point(b))
        assert de <= dab + 1e-12 and dab <= du(a, b) + 1e-12


def test_monotone_and_additive_along_paths(ust32):
    t = ust32
    rng = np.random.default_rng(3)
    for _ in range(30):
        x, y = (t.node(tuple(q)) for q in rng.integers(-20, 21, (2, 2)))
        vs = tree_path(t, x, y).vertices
        if not t.has_coord[vs].all():
            continue
        total = intrinsic_distance(t, x, y)
        for z in vs[:: max(1, len(vs) // 7)]:
            assert intrinsic_distance(t, x, z) + intrinsic_distance(t, z, y) == total
            assert intrinsic_distance(t, x, z) <= total
            assert schramm_distance_sq(t, x, z) <= schramm_distance_sq(t, x, y)


def test_pair_metrics_vectorised(ust32):
    t = ust32
    xs = np.array([t.node((0, 0)), t.node((4, -3))])
    ys = np.array([t.node((2, 2)), t.node((4, -3))])
    du, ds2 = pair_metrics(t, xs, ys)
    assert du.tolist() == [intrinsic_distance(t, xs[0], ys[0]), 0]
    assert ds2.tolist() == [schramm_distance_sq(t, xs[0], ys[0]), 0]


def test_ball_small_radii(ust32):
    t = ust32
    v = t.node((1, 1))
    assert intrinsic_ball(t, v, 0)[0].volume == 1
    b1, nodes = intrinsic_ball(t, v, 1)
    assert b1.volume == 1 + t.degree(v)
    assert not b1.truncated


def test_ball_profile_monotone_and_matches_ball(ust32):
    vols, trunc = ball_profile(ust32, ust32.root, 40)
    assert np.all(np.diff(vols) >= 0)
    for r in (0, 3, 17, 40):
        if trunc is None or r < trunc:
            assert vols[r] == intrinsic_ball(ust32, ust32.root, r)[0].volume


def test_ball_truncation_flag():
    t = comb_tree(6, window=4)
    b, _ = intrinsic_ball(t, t.root, 10)
    assert b.truncated
    b, _ = intrinsic_ball(t, t.root, 3)
    assert not b.truncated


def test_ball_stats_rows(ust32):
    b, _ = intrinsic_ball(ust32, ust32.root, 5)
    rows = ball_stats_rows(ust32, [b])
    assert rows == [("ball_volume", 0, 0, 5.0, b.volume, 0)]


@pytest.mark.parametrize("n,center,r,s", [(20, 10, 5, 5), (20, 10, 6, 2), (15, 3, 7, 3),
                                          (11, 5, 5, 1), (9, 4, 4, 4), (20, 9, 9, 3)])
def test_covering_number_on_paths_against_exhaustive(n, center, r, s):
    t = tree_from_edges(path_graph(n), [(i, i + 1) for i in range(n - 1)], center)
    greedy = covering_number(t, r, s)
    exact = min_cover_path(n, center, r, s)
    assert exact <= greedy
    assert greedy <= min_cover_path(n, center, r, s / 2)


def test_covering_number_center_ball(ust32):
    assert covering_number(ust32, 6, 6) == 1


def test_covering_number_monotone_in_s():
    for k in range(100):
        t = grid_tree(6, 6, 200 + k, root=14)
        vals = [covering_number(t, 8, s) for s in (1, 2, 3, 4, 6, 8)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_covering_number_truncated():
    with pytest.raises(TruncationError):
        covering_number(comb_tree(6, window=3), 8, 2)


def test_uniform_volume_vacuous_for_huge_lambda():
    t = comb_tree(40, window=41)
    ok, w = uniform_volume_check(t, 1e9, 4)
    assert ok and w["score"] >= 1


def test_uniform_volume_fails_on_path_tree():
    # a Hamiltonian path has balls of size 2R + 1, far below R^(8/5) / 2
    t = serpentine_tree(12, window=13)
    ok, w = uniform_volume_check(t, 2.0, 8)
    assert not ok
    top = 8 ** KAPPA
    assert w["radius"] == pytest.approx(top)
    G = tree_nx(t)
    c = t.node(w["center"])
    direct = sum(1 for d in nx.single_source_shortest_path_length(G, c).values()
                 if d <= math.floor(w["radius"]))
    assert w["volume"] == direct
    assert direct < w["radius"] ** D_F / 2.0


def test_uniform_volume_truncation():
    t = serpentine_tree(12, window=6)
    with pytest.raises(TruncationError):
        uniform_volume_check(t, 2.0, 8)


def test_ball_inclusion_first_event_certain_on_line():
    t = comb_tree(40, window=41)
    first, _ = ball_inclusion_stats([t], 10, 0.5)
    assert first == 1.0


def test_ball_inclusion_decreases_with_lambda(ust_many):
    lo = ball_inclusion_stats(ust_many, 6, 2.0)
    hi = ball_inclusion_stats(ust_many, 6, 32.0)
    assert hi[0] <= lo[0] and hi[1] <= lo[1]
    assert hi == (0.0, 0.0)
