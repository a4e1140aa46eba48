import math

import numpy as np
import pytest

from ustlab.constants import KAPPA
from ustlab.lattice import RandomSource
from ustlab.spatial import (CapacityError, Correspondence, MeasuredSpatialTree, delta_c_surrogate,
                            delta_distance, format_mst, four_point_defect, from_spanning_tree,
                            glued_metric, load_mst, parse_mst, prohorov, random_tree, restrict,
                            save_mst)
from ustlab.wilson import sample_ust

from oracles import gluing_grid_oracle, prohorov_brute


def _point(mass=1.0):
    return MeasuredSpatialTree(np.zeros((1, 1)), [mass], [[0.0, 0.0]])


# --- construction ---------------------------------------------------------------

def test_from_spanning_tree_scaling(ust32):
    t = ust32
    sample = np.array([t.node((0, 0)), t.node((1, 0)), t.node((5, 5))])
    T = from_spanning_tree(t, 0.5, sample)
    assert T.root == 0 and T.n == 3
    assert np.allclose(T.mass, 0.25)
    assert np.allclose(T.embed[2], [2.5, 2.5])
    assert T.dist[0, 1] == pytest.approx(0.5 ** KAPPA)
    T1 = from_spanning_tree(t, 1.0, sample)
    assert T1.dist[0, 2] == t.depth[sample[2]]


def test_from_spanning_tree_is_a_tree_metric():
    t = sample_ust(12, 2.0, RandomSource(1).generator)
    T = from_spanning_tree(t, 0.25)
    rng = np.random.default_rng(0)
    q = rng.integers(0, T.n, (1000, 4))
    assert four_point_defect(T.dist, q) < 1e-12
    assert np.array_equal(T.dist, T.dist.T)


def test_from_spanning_tree_errors(ust32):
    with pytest.raises(ValueError):
        from_spanning_tree(ust32, 0.0)
    with pytest.raises(ValueError):
        from_spanning_tree(ust32, 0.5, [ust32.node((1, 1))])
    with pytest.raises(CapacityError):
        from_spanning_tree(ust32, 0.5, max_points=10)


def test_four_point_detects_cycle_metric():
    # the 4-cycle with unit edges is not a tree metric
    D = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)
    assert four_point_defect(D) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        MeasuredSpatialTree(D, np.ones(4), np.zeros((4, 2))).check()


def test_random_tree_passes_check():
    for s in range(20):
        random_tree(7, s).check()


def test_restrict():
    T = random_tree(9, 3)
    assert restrict(T, 0).n == 1
    assert restrict(T, 1e9).same_as(T)
    R = restrict(T, 1.2)
    assert np.all(R.root_distances() <= 1.2)
    assert R.n == int((T.root_distances() <= 1.2).sum())
    assert restrict(R, 0.7).same_as(restrict(T, 0.7))


# --- Prohorov -------------------------------------------------------------------

def test_prohorov_examples():
    D = np.array([[0.0, 0.3], [0.3, 0.0]])
    assert prohorov(D, [1, 0], [1, 0]) == 0
    assert prohorov(D, [1, 0], [0, 1]) == pytest.approx(0.3)
    assert prohorov(np.zeros((1, 1)), [1.0], [0.4]) == pytest.approx(0.6)
    far = np.array([[0.0, 5.0], [5.0, 0.0]])
    assert prohorov(far, [1, 0], [0, 1]) == pytest.approx(1.0)


def test_prohorov_matches_brute_and_is_a_metric():
    rng = np.random.default_rng(4)
    for _ in range(40):
        k = int(rng.integers(2, 7))
        T = random_tree(k, rng)
        mus = [rng.uniform(0, 1, k) * (rng.random(k) < 0.7) for _ in range(3)]
        a, b, c = (prohorov(T.dist, x, y) for x, y in
                   [(mus[0], mus[1]), (mus[1], mus[2]), (mus[0], mus[2])])
        assert a == pytest.approx(prohorov_brute(T.dist, mus[0], mus[1]), abs=1e-12)
        assert a == pytest.approx(prohorov(T.dist, mus[1], mus[0]), abs=1e-12)
        assert c <= a + b + 1e-12


def test_prohorov_subset_and_flow_agree():
    rng = np.random.default_rng(5)
    for _ in range(30):
        k = int(rng.integers(2, 12))
        T = random_tree(k, rng)
        mu, nu = rng.uniform(0, 1, k), rng.uniform(0, 1, k)
        assert prohorov(T.dist, mu, nu, "subset") == pytest.approx(
            prohorov(T.dist, mu, nu, "flow"), abs=1e-9)


def test_prohorov_subset_capacity():
    T = random_tree(20, 0)
    with pytest.raises(CapacityError):
        prohorov(T.dist, np.ones(20), np.ones(20), "subset")
    assert prohorov(T.dist, np.ones(20), np.ones(20)) == 0


# --- surrogate ------------------------------------------------------------------

def test_surrogate_identity():
    for s in range(10):
        T = random_tree(4 + s % 5, s)
        res = delta_c_surrogate(T, T)
        assert res.upper < 1e-12
        assert res.lower == 0


def test_surrogate_identity_witness_is_diagonal():
    T = random_tree(3, 1)
    res = delta_c_surrogate(T, T)
    assert set(res.witness.pairs) >= {(0, 0), (1, 1), (2, 2)}


def test_surrogate_point_masses():
    res = delta_c_surrogate(_point(1.0), _point(2.0))
    assert res.upper == pytest.approx(1.0) and res.exhaustive


def test_surrogate_not_below_lower_bound():
    rng = np.random.default_rng(6)
    for _ in range(30):
        T, U = random_tree(int(rng.integers(1, 7)), rng), random_tree(int(rng.integers(1, 7)), rng)
        res = delta_c_surrogate(T, U, budget=500)
        assert res.upper >= res.lower - 1e-12
        assert res.witness.is_valid(T.n, U.n, (T.root, U.root))


def test_surrogate_mass_perturbation():
    rng = np.random.default_rng(7)
    for eps in (0.01, 0.1):
        T = random_tree(4, rng)
        U = MeasuredSpatialTree(T.dist, T.mass * (1 + eps / T.total_mass), T.embed, T.root)
        assert delta_c_surrogate(T, U).upper <= eps + 1e-12


def test_surrogate_symmetric():
    rng = np.random.default_rng(8)
    for _ in range(10):
        T, U = random_tree(5, rng), random_tree(6, rng)
        a, b = delta_c_surrogate(T, U, budget=300), delta_c_surrogate(U, T, budget=300)
        assert a.upper == b.upper


def test_surrogate_matches_grid_oracle_on_three_points():
    rng = np.random.default_rng(9)
    for _ in range(5):
        T, U = random_tree(3, rng), random_tree(3, rng)
        res = delta_c_surrogate(T, U)
        assert abs(res.upper - gluing_grid_oracle(T, U)) <= 1e-3


def test_glued_metric_is_a_metric():
    T, U = random_tree(4, 1), random_tree(3, 2)
    C = Correspondence(((0, 0), (1, 1), (2, 2), (3, 2)))
    Z = glued_metric(T, U, C)
    tri = Z[:, :, None] - Z[:, None, :] - Z[None, :, :].transpose(0, 2, 1)
    assert tri.max() <= 1e-12


# --- Delta ----------------------------------------------------------------------

def test_delta_identity():
    T = random_tree(6, 3)
    assert delta_distance(T, T).value == 0


def test_delta_restriction_bound():
    for s in range(5):
        T = random_tree(6, 10 + s, length=(0.3, 1.5))
        for r in (1, 2, 4):
            assert delta_distance(T, restrict(T, r), budget=300).value <= math.exp(-r) + 1e-12


def test_delta_symmetric_and_bounded():
    T, U = random_tree(5, 20), random_tree(4, 21)
    a, b = delta_distance(T, U, budget=300), delta_distance(U, T, budget=300)
    assert abs(a.value - b.value) < 1e-9
    assert 0 <= a.value <= 1


def test_delta_rmax_error_term():
    T, U = random_tree(5, 22), random_tree(5, 23)
    full = delta_distance(T, U, budget=300)
    cut = delta_distance(T, U, rmax=0.5, budget=300)
    assert cut.error == pytest.approx(math.exp(-0.5))
    assert cut.value <= full.value + 1e-12 <= cut.value + cut.error + 1e-12


def test_delta_on_lattice_trees():
    a = sample_ust(6, 2.0, RandomSource(1).generator)
    b = sample_ust(6, 2.0, RandomSource(2).generator)
    pick = lambda u: [u.node((0, 0)), u.node((1, 0)), u.node((0, 1))]
    T, U = from_spanning_tree(a, 0.5, pick(a)), from_spanning_tree(b, 0.5, pick(b))
    assert 0 <= delta_distance(T, U).value <= 1


# --- mst-v1 --------------------------------------------------------------------

def test_mst_roundtrip(tmp_path):
    for s in range(20):
        T = random_tree(1 + s % 6, s)
        text = format_mst(T)
        assert parse_mst(text).same_as(T)
        assert format_mst(parse_mst(text)) == text
    path = tmp_path / "t.mst"
    save_mst(T, path)
    assert load_mst(path).same_as(T)


def test_mst_parse_errors():
    text = format_mst(random_tree(4, 0))
    with pytest.raises(ValueError, match="line 1"):
        parse_mst("mst-v2 n=4 root=0\n")
    with pytest.raises(ValueError, match="line 3"):
        parse_mst(text.replace("\n1 ", "\n7 ", 1))
    with pytest.raises(ValueError, match="distance tokens"):
        parse_mst("\n".join(text.splitlines()[:-1]))
