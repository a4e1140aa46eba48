"""Finite measured, rooted, spatial trees and distances between them.

A :class:`MeasuredSpatialTree` is a finite point set with a tree metric, point
masses, planar coordinates and a root.  The distance ``Delta_c`` between two
such trees is an infimum over metric gluings and root-preserving
correspondences; here it is bracketed by a certified upper bound (the best
correspondence found inside the family of one-step gluings) and a cheap lower
bound.  ``Delta`` integrates ``1 ^ Delta_c`` of the restrictions against
``exp(-r)``.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np

from .constants import KAPPA

__all__ = [
    "MeasuredSpatialTree",
    "Correspondence",
    "CapacityError",
    "DeltaCResult",
    "DeltaResult",
    "from_spanning_tree",
    "restrict",
    "prohorov",
    "glued_metric",
    "correspondence_objective",
    "delta_c_surrogate",
    "delta_distance",
    "four_point_defect",
    "random_tree",
    "format_mst",
    "parse_mst",
    "save_mst",
    "load_mst",
]

SUBSET_CAP = 16
EXHAUSTIVE_CAP = 4


class CapacityError(ValueError):
    pass


@dataclass(eq=False)
class MeasuredSpatialTree:
    dist: np.ndarray
    mass: np.ndarray
    embed: np.ndarray
    root: int = 0

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=np.float64)
        self.mass = np.asarray(self.mass, dtype=np.float64)
        self.embed = np.asarray(self.embed, dtype=np.float64).reshape(-1, 2)
        n = len(self.mass)
        if self.dist.shape != (n, n) or self.embed.shape != (n, 2):
            raise ValueError("dist, mass and embed sizes disagree")
        if not 0 <= self.root < n:
            raise ValueError("root index out of range")
        if np.any(self.mass < 0):
            raise ValueError("masses must be non-negative")

    @property
    def n(self) -> int:
        return len(self.mass)

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def root_distances(self) -> np.ndarray:
        return self.dist[self.root]

    def same_as(self, other: "MeasuredSpatialTree") -> bool:
        return (self.root == other.root and self.n == other.n
                and np.array_equal(self.dist, other.dist)
                and np.array_equal(self.mass, other.mass)
                and np.array_equal(self.embed, other.embed))

    def check(self, tol: float = 1e-9) -> None:
        D = self.dist
        if np.any(np.abs(D - D.T) > tol) or np.any(np.abs(np.diag(D)) > tol) or np.any(D < -tol):
            raise ValueError("dist is not a symmetric non-negative matrix with zero diagonal")
        if self.n >= 3:
            tri = D[:, :, None] - D[:, None, :] - D[None, :, :].transpose(0, 2, 1)
            if tri.max() > tol:
                raise ValueError("triangle inequality fails")
        if four_point_defect(D) > tol:
            raise ValueError("four-point condition fails")


@dataclass(frozen=True)
class Correspondence:
    pairs: tuple

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Correspondence":
        return cls(tuple((int(i), int(j)) for i, j in zip(*np.nonzero(mask))))

    def mask(self, n: int, m: int) -> np.ndarray:
        out = np.zeros((n, m), dtype=np.bool_)
        for i, j in self.pairs:
            out[i, j] = True
        return out

    def is_valid(self, n: int, m: int, roots=(0, 0)) -> bool:
        a = self.mask(n, m)
        return bool(a.any(axis=1).all() and a.any(axis=0).all() and a[roots[0], roots[1]])


@dataclass
class DeltaCResult:
    upper: float
    lower: float
    witness: Correspondence
    exhaustive: bool
    evaluations: int
    budget_exhausted: bool = False

    @property
    def heuristic(self) -> bool:
        return not self.exhaustive


@dataclass
class DeltaResult:
    value: float
    error: float
    heuristic: bool
    evaluations: int
    grid: np.ndarray = field(repr=False, default=None)
    integrand: np.ndarray = field(repr=False, default=None)


# --- construction --------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _pairwise_du(parent, depth, nodes):
    k = nodes.shape[0]
    out = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            a, b = nodes[i], nodes[j]
            d = 0
            while depth[a] > depth[b]:
                a = parent[a]
                d += 1
            while depth[b] > depth[a]:
                b = parent[b]
                d += 1
            while a != b:
                a = parent[a]
                b = parent[b]
                d += 2
            out[i, j] = d
            out[j, i] = d
    return out


def from_spanning_tree(t, delta: float = 1.0, sample=None, *, max_points: int = 4000):
    """Rescaled finite tree: distances ``delta^kappa d_U``, masses ``delta^2``,
    coordinates ``delta * phi``, rooted at the origin."""
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    origin = t.node((0, 0))
    if sample is None:
        sample = np.flatnonzero(t.has_coord)
    sample = np.asarray(sample, dtype=np.int64)
    if len(sample) > max_points:
        raise CapacityError(f"{len(sample)} points exceed max_points={max_points}")
    hits = np.flatnonzero(sample == origin)
    if len(hits) == 0:
        raise ValueError("origin not in sample")
    if not t.has_coord[sample].all():
        raise ValueError("sample contains a vertex without lattice position")
    du = _pairwise_du(t.parent, t.depth, sample)
    return MeasuredSpatialTree(
        dist=delta ** KAPPA * du.astype(np.float64),
        mass=np.full(len(sample), delta ** 2),
        embed=delta * t.coords[sample].astype(np.float64),
        root=int(hits[0]),
    )


def restrict(T: MeasuredSpatialTree, r: float) -> MeasuredSpatialTree:
    """Closed ball of radius ``r`` about the root, root kept."""
    if r < 0:
        raise ValueError("r must be non-negative")
    keep = np.flatnonzero(T.dist[T.root] <= r)
    return MeasuredSpatialTree(T.dist[np.ix_(keep, keep)], T.mass[keep], T.embed[keep],
                               int(np.searchsorted(keep, T.root)))


def random_tree(n: int, rng, *, length=(0.1, 1.0), mass=(0.1, 1.0), spread: float = 1.0):
    """Random recursive tree with random edge lengths, masses and coordinates."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    D = np.zeros((n, n))
    embed = np.zeros((n, 2))
    for v in range(1, n):
        p = int(rng.integers(0, v))
        w = rng.uniform(*length)
        D[v, :v] = D[p, :v] + w
        D[:v, v] = D[v, :v]
        embed[v] = embed[p] + rng.normal(0.0, spread * w, 2)
    return MeasuredSpatialTree(D, rng.uniform(*mass, n), embed, 0)


def four_point_defect(D, quadruples=None) -> float:
    """Largest violation of the four-point condition over the quadruples.

    For every ``x, y, z, w``: ``d(x,y) + d(z,w) <= max(d(x,z) + d(y,w), d(x,w) + d(y,z))``.
    All quadruples are used when none are given.
    """
    D = np.asarray(D, dtype=np.float64)
    n = len(D)
    if n < 4 and quadruples is None:
        return 0.0
    if quadruples is None:
        idx = np.arange(n)
        x, y, z, w = np.meshgrid(idx, idx, idx, idx, indexing="ij")
        x, y, z, w = x.ravel(), y.ravel(), z.ravel(), w.ravel()
    else:
        q = np.asarray(quadruples, dtype=np.int64)
        x, y, z, w = q.T
    lhs = D[x, y] + D[z, w]
    rhs = np.maximum(D[x, z] + D[y, w], D[x, w] + D[y, z])
    return float(max(0.0, (lhs - rhs).max()))


# --- Prohorov ------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _mass_table(w):
    k = w.shape[0]
    tab = np.zeros(1 << k)
    for s in range(1, 1 << k):
        low = s & (-s)
        i = 0
        while (1 << i) != low:
            i += 1
        tab[s] = tab[s ^ low] + w[i]
    return tab


@numba.njit(cache=True, nogil=True)
def _worst_gap(X, d, w_src, tab_dst, nbr_buf):
    """max over subsets A of sources of w(A) - w_dst(N_d(A))."""
    a, b = X.shape
    for i in range(a):
        msk = 0
        for j in range(b):
            if X[i, j] <= d:
                msk |= 1 << j
        nbr_buf[i] = msk
    nb = np.zeros(1 << a, dtype=np.int64)
    mw = np.zeros(1 << a)
    best = 0.0
    for s in range(1, 1 << a):
        low = s & (-s)
        i = 0
        while (1 << i) != low:
            i += 1
        nb[s] = nb[s ^ low] | nbr_buf[i]
        mw[s] = mw[s ^ low] + w_src[i]
        g = mw[s] - tab_dst[nb[s]]
        if g > best:
            best = g
    return best


@numba.njit(cache=True, nogil=True)
def _prohorov_cross(X, w1, w2):
    """Prohorov distance for atoms with masses ``w1`` and ``w2`` whose
    cross distances are ``X``; closed fattenings."""
    a, b = X.shape
    tab1 = _mass_table(w1)
    tab2 = _mass_table(w2)
    levels = np.empty(a * b + 1)
    levels[0] = 0.0
    levels[1:] = X.ravel()
    levels = np.unique(levels)
    buf1 = np.empty(max(a, 1), dtype=np.int64)
    buf2 = np.empty(max(b, 1), dtype=np.int64)
    XT = X.T.copy()
    best = np.inf
    for d in levels:
        if d >= best:
            break
        h = max(_worst_gap(X, d, w1, tab2, buf1), _worst_gap(XT, d, w2, tab1, buf2))
        cand = max(d, h)
        if cand < best:
            best = cand
    return best


def _maxflow_value(X, w1, w2, d):
    import networkx as nx

    G = nx.DiGraph()
    for i, m in enumerate(w1):
        G.add_edge("s", ("a", i), capacity=float(m))
    for j, m in enumerate(w2):
        G.add_edge(("b", j), "t", capacity=float(m))
    ii, jj = np.nonzero(X <= d)
    for i, j in zip(ii.tolist(), jj.tolist()):
        G.add_edge(("a", i), ("b", j))
    if "s" not in G or "t" not in G:
        return 0.0
    return float(nx.maximum_flow_value(G, "s", "t"))


def _prohorov_flow(X, w1, w2):
    # For a threshold d, sup_A [w1(A) - w2(A^d)] = w1 total - maxflow(d), and the
    # same maximum flow serves the reverse inequality.
    levels = np.unique(np.concatenate([[0.0], X.ravel()]))
    top = max(w1.sum(), w2.sum())

    def h(k):
        return top - _maxflow_value(X, w1, w2, levels[k])

    lo, hi = 0, len(levels) - 1
    if levels[hi] < h(hi):
        return float(h(hi))
    while lo < hi:  # first k with levels[k] >= h(k)
        mid = (lo + hi) // 2
        if levels[mid] >= h(mid):
            hi = mid
        else:
            lo = mid + 1
    ans = levels[lo]
    if lo > 0:
        ans = min(ans, h(lo - 1))
    return float(max(ans, 0.0))


def _supports(mu, nu):
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    return np.flatnonzero(mu > 0), np.flatnonzero(nu > 0)


def prohorov(D, mu, nu, method: str = "auto") -> float:
    """Prohorov distance between finite measures on a finite metric space.

    ``D`` is the distance matrix of the space; ``mu`` and ``nu`` give masses
    per point.  The smallest ``eps`` with ``mu(A) <= nu(A^eps) + eps`` and
    ``nu(A) <= mu(A^eps) + eps`` for all ``A`` (closed fattening) is found by
    scanning pairwise distances.  ``method='subset'`` enumerates subsets of
    each support (at most 16 atoms each); ``'flow'`` uses maximum flows.
    """
    D = np.asarray(D, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    s1, s2 = _supports(mu, nu)
    X = np.ascontiguousarray(D[np.ix_(s1, s2)])
    return prohorov_cross(X, mu[s1], nu[s2], method)


def prohorov_cross(X, w1, w2, method: str = "auto") -> float:
    """Prohorov distance given only the cross distances between two supports."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64).reshape(len(w1), len(w2)))
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    small = max(len(w1), len(w2)) <= SUBSET_CAP
    if method == "auto":
        method = "subset" if small else "flow"
    if method == "subset":
        if not small:
            raise CapacityError(f"subset enumeration supports at most {SUBSET_CAP} atoms")
        return float(_prohorov_cross(X, w1, w2))
    if method == "flow":
        return _prohorov_flow(X, w1, w2)
    raise ValueError(f"unknown method {method!r}")


# --- gluing and the surrogate --------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _distortion(D1, D2, pa, pb):
    k = pa.shape[0]
    dis = 0.0
    for u in range(k):
        for v in range(u + 1, k):
            g = abs(D1[pa[u], pa[v]] - D2[pb[u], pb[v]])
            if g > dis:
                dis = g
    return dis


@numba.njit(cache=True, nogil=True)
def _cross_dist(D1, D2, pa, pb, slack):
    n = D1.shape[0]
    m = D2.shape[0]
    X = np.empty((n, m))
    for x in range(n):
        for y in range(m):
            best = np.inf
            for u in range(pa.shape[0]):
                c = D1[x, pa[u]] + D2[pb[u], y]
                if c < best:
                    best = c
            X[x, y] = best + slack
    return X


@numba.njit(cache=True, nogil=True)
def _objective(D1, D2, E, w1, w2, s1, s2, pa, pb):
    dis = _distortion(D1, D2, pa, pb)
    emax = 0.0
    for u in range(pa.shape[0]):
        if E[pa[u], pb[u]] > emax:
            emax = E[pa[u], pb[u]]
    X = _cross_dist(D1, D2, pa, pb, 0.5 * dis)
    Xs = np.empty((s1.shape[0], s2.shape[0]))
    for i in range(s1.shape[0]):
        for j in range(s2.shape[0]):
            Xs[i, j] = X[s1[i], s2[j]]
    return _prohorov_cross(Xs, w1, w2) + 0.5 * dis + emax


@numba.njit(cache=True, nogil=True)
def _exhaustive(D1, D2, E, w1, w2, s1, s2, r1, r2, gap):
    n = D1.shape[0]
    m = D2.shape[0]
    P = n * m
    rp = r1 * m + r2
    others = np.empty(P - 1, dtype=np.int64)
    k = 0
    for p in range(P):
        if p != rp:
            others[k] = p
            k += 1
    full_rows = (1 << n) - 1
    full_cols = (1 << m) - 1
    best = np.inf
    best_mask = -1
    evals = 0
    pa = np.empty(P, dtype=np.int64)
    pb = np.empty(P, dtype=np.int64)
    for mask in range(1 << (P - 1)):
        cnt = 1
        pa[0] = r1
        pb[0] = r2
        rows = 1 << r1
        cols = 1 << r2
        for q in range(P - 1):
            if mask & (1 << q):
                p = others[q]
                i = p // m
                j = p % m
                pa[cnt] = i
                pb[cnt] = j
                cnt += 1
                rows |= 1 << i
                cols |= 1 << j
        if rows != full_rows or cols != full_cols:
            continue
        a = pa[:cnt]
        b = pb[:cnt]
        dis = _distortion(D1, D2, a, b)
        emax = 0.0
        for u in range(cnt):
            if E[a[u], b[u]] > emax:
                emax = E[a[u], b[u]]
        if 0.5 * dis + emax + gap >= best:
            continue
        evals += 1
        val = _objective(D1, D2, E, w1, w2, s1, s2, a, b)
        if val < best:
            best = val
            best_mask = mask
    return best, best_mask, others, evals


def _prep(T, U):
    E = np.sqrt(((T.embed[:, None, :] - U.embed[None, :, :]) ** 2).sum(axis=2))
    s1 = np.flatnonzero(T.mass > 0)
    s2 = np.flatnonzero(U.mass > 0)
    return E, s1, s2, T.mass[s1].copy(), U.mass[s2].copy()


def glued_metric(T: MeasuredSpatialTree, U: MeasuredSpatialTree, C: Correspondence,
                 slack: float | None = None) -> np.ndarray:
    """Distance matrix of the disjoint union glued along ``C``.

    Cross distances are ``min over (a, a') in C of d(x, a) + slack + d'(a', x')``
    with ``slack = dis(C) / 2`` unless given.
    """
    pa = np.array([p[0] for p in C.pairs], dtype=np.int64)
    pb = np.array([p[1] for p in C.pairs], dtype=np.int64)
    if slack is None:
        slack = 0.5 * _distortion(T.dist, U.dist, pa, pb)
    X = _cross_dist(T.dist, U.dist, pa, pb, float(slack))
    return np.block([[T.dist, X], [X.T, U.dist]])


def correspondence_objective(T, U, C: Correspondence) -> float:
    """Prohorov term plus ``sup over C`` of glued distance plus embedding distance."""
    E, s1, s2, w1, w2 = _prep(T, U)
    pa = np.array([p[0] for p in C.pairs], dtype=np.int64)
    pb = np.array([p[1] for p in C.pairs], dtype=np.int64)
    if max(len(s1), len(s2)) <= SUBSET_CAP:
        return float(_objective(T.dist, U.dist, E, w1, w2, s1, s2, pa, pb))
    dis = _distortion(T.dist, U.dist, pa, pb)
    X = _cross_dist(T.dist, U.dist, pa, pb, 0.5 * dis)
    return prohorov_cross(X[np.ix_(s1, s2)], w1, w2, "flow") + 0.5 * dis + float(E[pa, pb].max())


def _lower_bound(T, U):
    gap = abs(T.total_mass - U.total_mass)
    root = float(np.hypot(*(T.embed[T.root] - U.embed[U.root])))
    return max(gap, root)


def delta_c_surrogate(T: MeasuredSpatialTree, U: MeasuredSpatialTree, budget: int = 4000,
                      *, restarts: int = 4, seed: int = 0) -> DeltaCResult:
    """Bracket ``Delta_c(T, U)``.

    ``upper`` is the objective of the best root-preserving correspondence
    found (exhaustive search when both trees have at most four points, local
    search from greedy matchings otherwise); ``lower`` is the larger of the
    total-mass gap and the distance between root embeddings.
    """
    if T.n == 0 or U.n == 0:
        raise ValueError("trees must be nonempty")
    if format_mst(U) < format_mst(T):
        # search from a canonical side so the result is symmetric in (T, U)
        res = delta_c_surrogate(U, T, budget, restarts=restarts, seed=seed)
        res.witness = Correspondence(tuple(sorted((j, i) for i, j in res.witness.pairs)))
        return res
    lower = _lower_bound(T, U)
    E, s1, s2, w1, w2 = _prep(T, U)
    gap = abs(T.total_mass - U.total_mass)
    if T.n <= EXHAUSTIVE_CAP and U.n <= EXHAUSTIVE_CAP:
        best, mask, others, evals = _exhaustive(T.dist, U.dist, E, w1, w2, s1, s2,
                                                T.root, U.root, gap)
        m = U.n
        pairs = [(T.root, U.root)] + [(int(others[q]) // m, int(others[q]) % m)
                                      for q in range(len(others)) if mask >> q & 1]
        return DeltaCResult(float(best), lower, Correspondence(tuple(sorted(pairs))), True,
                            int(evals))
    return _local_search(T, U, E, budget, restarts, seed, lower)


def _local_search(T, U, E, budget, restarts, seed, lower):
    n, m = T.n, U.n
    rng = np.random.default_rng(seed)
    evals = 0
    cache = {}

    def value(mask):
        nonlocal evals
        key = mask.tobytes()
        if key not in cache:
            evals += 1
            cache[key] = correspondence_objective(T, U, Correspondence.from_mask(mask))
        return cache[key]

    def valid(mask):
        return mask[T.root, U.root] and mask.any(axis=1).all() and mask.any(axis=0).all()

    cost = np.abs(T.dist[T.root][:, None] - U.dist[U.root][None, :]) + E
    greedy = np.zeros((n, m), dtype=np.bool_)
    greedy[np.arange(n), cost.argmin(axis=1)] = True
    greedy[cost.argmin(axis=0), np.arange(m)] = True
    greedy[T.root, U.root] = True
    starts = [greedy]
    if n == m:
        diag = np.eye(n, dtype=np.bool_)
        diag[T.root, U.root] = True
        if valid(diag):
            starts.insert(0, diag)
    best_mask, best = None, np.inf
    exhausted = False
    pending = list(starts)
    rounds = 0
    while pending:
        cur = pending.pop(0)
        cur_val = value(cur)
        improved = True
        while improved and evals < budget:
            improved = False
            for i in range(n):
                for j in range(m):
                    if (i, j) == (T.root, U.root):
                        continue
                    cand = cur.copy()
                    cand[i, j] = not cand[i, j]
                    if not valid(cand):
                        continue
                    v = value(cand)
                    if v < cur_val - 1e-15:
                        cur, cur_val, improved = cand, v, True
                    if evals >= budget:
                        exhausted = True
                        break
                if exhausted:
                    break
        if cur_val < best or (cur_val == best and cur.tobytes() < best_mask.tobytes()):
            best, best_mask = cur_val, cur
        if best <= lower + 1e-15 or exhausted:
            break
        if not pending and rounds < restarts:
            rounds += 1
            kick = best_mask.copy()
            for _ in range(max(1, (n * m) // 8)):
                kick[rng.integers(n), rng.integers(m)] ^= True
            kick[T.root, U.root] = True
            kick[np.arange(n), cost.argmin(axis=1)] |= ~kick.any(axis=1)
            kick[cost.argmin(axis=0), np.arange(m)] |= ~kick.any(axis=0)
            pending.append(kick)
    return DeltaCResult(float(best), lower, Correspondence.from_mask(best_mask), False, evals,
                        exhausted)


def delta_distance(T: MeasuredSpatialTree, U: MeasuredSpatialTree, rmax: float | None = None,
                   grid: float | None = None, *, budget: int = 4000, seed: int = 0
                   ) -> DeltaResult:
    """``integral_0^inf exp(-r) min(1, Delta_c(T^(r), U^(r))) dr`` from surrogate upper bounds.

    Restrictions only change at the root distances of either tree, so the
    integrand is a step function on that jump grid (optionally refined to
    spacing ``grid``) and is integrated exactly.  Cutting the integral at
    ``rmax`` adds at most ``exp(-rmax)`` to ``error``.
    """
    jumps = np.unique(np.concatenate([[0.0], T.root_distances(), U.root_distances()]))
    last = jumps[-1]
    error = 0.0
    end = math.inf
    if rmax is not None:
        if rmax <= 0:
            raise ValueError("rmax must be positive")
        if rmax < last:
            jumps = jumps[jumps < rmax]
            end = float(rmax)
            error = math.exp(-rmax)
    if grid is not None:
        stop = end if math.isfinite(end) else last
        fine = np.arange(0.0, stop, grid)
        jumps = np.unique(np.concatenate([jumps, fine]))
    cache = {}
    heuristic = False
    evals = 0
    values = np.empty(len(jumps))
    for k, s in enumerate(jumps):
        A, B = restrict(T, s), restrict(U, s)
        key = (tuple(np.flatnonzero(T.root_distances() <= s)),
               tuple(np.flatnonzero(U.root_distances() <= s)))
        if key not in cache:
            if A.same_as(B):
                cache[key] = 0.0
            else:
                res = delta_c_surrogate(A, B, budget, seed=seed)
                heuristic |= res.heuristic
                evals += res.evaluations
                cache[key] = min(1.0, res.upper)
        values[k] = cache[key]
    right = np.append(jumps[1:], end)
    weights = np.exp(-jumps) - np.exp(-right)
    value = float(np.dot(values, weights))
    return DeltaResult(value, error, heuristic, evals, jumps, values)


# --- mst-v1 -------------------------------------------------------------------

def format_mst(T: MeasuredSpatialTree) -> str:
    lines = [f"mst-v1 n={T.n} root={T.root}"]
    for i in range(T.n):
        lines.append(f"{i} {float(T.mass[i])!r} {float(T.embed[i, 0])!r} {float(T.embed[i, 1])!r}")
    for i in range(T.n - 1):
        lines.append(" ".join(repr(float(v)) for v in T.dist[i, i + 1:]))
    return "\n".join(lines) + "\n"


def parse_mst(text: str) -> MeasuredSpatialTree:
    lines = text.splitlines()
    if not lines:
        raise ValueError("line 1: empty input")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "mst-v1":
        raise ValueError("line 1: expected 'mst-v1 n=<points> root=<idx>'")
    try:
        fields = dict(tok.split("=", 1) for tok in head[1:])
        n, root = int(fields["n"]), int(fields["root"])
    except (KeyError, ValueError):
        raise ValueError("line 1: malformed header") from None
    if len(lines) < 1 + n:
        raise ValueError(f"line {len(lines) + 1}: expected {n} point lines")
    mass = np.empty(n)
    embed = np.empty((n, 2))
    for k in range(n):
        toks = lines[1 + k].split()
        if len(toks) != 4 or int(toks[0]) != k:
            raise ValueError(f"line {k + 2}: expected '{k} mass ex ey'")
        mass[k], embed[k, 0], embed[k, 1] = map(float, toks[1:])
    vals = " ".join(lines[1 + n:]).split()
    if len(vals) != n * (n - 1) // 2:
        raise ValueError(f"expected {n * (n - 1) // 2} distance tokens, found {len(vals)}")
    D = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    D[iu] = np.array(vals, dtype=np.float64)
    D = D + D.T
    return MeasuredSpatialTree(D, mass, embed, root)


def save_mst(T: MeasuredSpatialTree, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_mst(T))


def load_mst(path) -> MeasuredSpatialTree:
    with open(os.fspath(path)) as fh:
        return parse_mst(fh.read())
