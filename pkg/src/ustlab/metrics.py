"""Intrinsic and Schramm metrics on a spanning tree, balls, covers and volume tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .constants import D_F, KAPPA
from .tree import SpanningTree, TruncationError

__all__ = [
    "TreePath",
    "BallStats",
    "tree_path",
    "intrinsic_distance",
    "schramm_distance",
    "schramm_distance_sq",
    "diameter_sq",
    "pair_metrics",
    "bfs_distances",
    "intrinsic_ball",
    "ball_profile",
    "covering_number",
    "uniform_volume_check",
    "ball_inclusion_stats",
    "ball_stats_rows",
]


@dataclass(frozen=True)
class TreePath:
    vertices: np.ndarray

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class BallStats:
    center: int
    radius: float
    volume: int
    boundary_size: int
    truncated: bool = False


# --- kernels -------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _du(parent, depth, x, y):
    a, b = x, y
    da, db = depth[a], depth[b]
    d = 0
    while da > db:
        a = parent[a]
        da -= 1
        d += 1
    while db > da:
        b = parent[b]
        db -= 1
        d += 1
    while a != b:
        a = parent[a]
        b = parent[b]
        d += 2
    return d


@numba.njit(cache=True, nogil=True)
def _path(parent, depth, x, y):
    n_up = _du(parent, depth, x, y)
    out = np.empty(n_up + 1, dtype=np.int64)
    a, b = x, y
    i, j = 0, n_up
    while depth[a] > depth[b]:
        out[i] = a
        a = parent[a]
        i += 1
    while depth[b] > depth[a]:
        out[j] = b
        b = parent[b]
        j -= 1
    while a != b:
        out[i] = a
        out[j] = b
        a = parent[a]
        b = parent[b]
        i += 1
        j -= 1
    out[i] = a
    return out


@numba.njit(cache=True, nogil=True)
def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@numba.njit(cache=True, nogil=True)
def _hull(pts):
    """Andrew's monotone chain; counter-clockwise hull of integer points."""
    ymin = pts[:, 1].min()
    span = pts[:, 1].max() - ymin + 1
    order = np.argsort((pts[:, 0] - pts[:, 0].min()) * span + (pts[:, 1] - ymin), kind="mergesort")
    p = pts[order]
    n = p.shape[0]
    h = np.empty((2 * n + 1, 2), dtype=np.int64)
    k = 0
    for i in range(n):
        while k >= 2 and _cross(h[k - 2, 0], h[k - 2, 1], h[k - 1, 0], h[k - 1, 1],
                                p[i, 0], p[i, 1]) <= 0:
            k -= 1
        h[k] = p[i]
        k += 1
    lower = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower and _cross(h[k - 2, 0], h[k - 2, 1], h[k - 1, 0], h[k - 1, 1],
                                    p[i, 0], p[i, 1]) <= 0:
            k -= 1
        h[k] = p[i]
        k += 1
    return h[:max(k - 1, 1)]


@numba.njit(cache=True, nogil=True)
def _d2(a, b):
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy


@numba.njit(cache=True, nogil=True)
def _diam2(pts):
    """Squared diameter of a planar integer point set (rotating calipers)."""
    n = pts.shape[0]
    if n < 2:
        return 0
    if n <= 3:
        best = 0
        for i in range(n):
            for j in range(i + 1, n):
                d = _d2(pts[i], pts[j])
                if d > best:
                    best = d
        return best
    h = _hull(pts)
    m = h.shape[0]
    if m == 1:
        return 0
    if m == 2:
        return _d2(h[0], h[1])
    best = 0
    j = 1
    for i in range(m):
        i2 = (i + 1) % m
        # advance antipodal pointer while the triangle area grows
        while True:
            j2 = (j + 1) % m
            a1 = abs(_cross(h[i, 0], h[i, 1], h[i2, 0], h[i2, 1], h[j, 0], h[j, 1]))
            a2 = abs(_cross(h[i, 0], h[i, 1], h[i2, 0], h[i2, 1], h[j2, 0], h[j2, 1]))
            if a2 > a1:
                j = j2
            else:
                break
        for c in (j, (j + 1) % m):
            d = _d2(h[i], h[c])
            if d > best:
                best = d
            d = _d2(h[i2], h[c])
            if d > best:
                best = d
    return best


@numba.njit(cache=True, nogil=True)
def _pairs_kernel(parent, depth, coords, has_coord, xs, ys):
    k = xs.shape[0]
    du = np.empty(k, dtype=np.int64)
    ds2 = np.empty(k, dtype=np.int64)
    for i in range(k):
        p = _path(parent, depth, xs[i], ys[i])
        du[i] = p.shape[0] - 1
        ok = True
        for v in p:
            if not has_coord[v]:
                ok = False
                break
        if ok:
            ds2[i] = _diam2(coords[p])
        else:
            ds2[i] = -1
    return du, ds2


@numba.njit(cache=True, nogil=True)
def _bfs(indptr, indices, src, maxd, edge_mask, stop):
    """Nodes within ``maxd`` of ``src`` in BFS order with their distances.

    ``trunc`` is the smallest distance of a visited edge-masked node (-1 if none).
    """
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.bool_)
    cap = 1024
    nodes = np.empty(cap, dtype=np.int64)
    dist = np.empty(cap, dtype=np.int64)
    nodes[0] = src
    dist[0] = 0
    seen[src] = True
    head = 0
    tail = 1
    trunc = -1
    if edge_mask[src]:
        trunc = 0
    while head < tail:
        v = nodes[head]
        dv = dist[head]
        head += 1
        if dv >= maxd or (stop and edge_mask[v]):
            continue
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if seen[w]:
                continue
            seen[w] = True
            if tail == cap:
                cap *= 2
                nn = np.empty(cap, dtype=np.int64)
                nd = np.empty(cap, dtype=np.int64)
                nn[:tail] = nodes[:tail]
                nd[:tail] = dist[:tail]
                nodes = nn
                dist = nd
            nodes[tail] = w
            dist[tail] = dv + 1
            if edge_mask[w] and trunc < 0:
                trunc = dv + 1
            tail += 1
    return nodes[:tail], dist[:tail], trunc


# --- public API ----------------------------------------------------------------

def _check(t: SpanningTree, v) -> int:
    v = int(v)
    if not 0 <= v < t.n:
        raise ValueError(f"vertex {v} not in tree of {t.n} vertices")
    return v


def tree_path(t: SpanningTree, x: int, y: int) -> TreePath:
    """The unique path from ``x`` to ``y`` through their lowest common ancestor."""
    return TreePath(_path(t.parent, t.depth, _check(t, x), _check(t, y)))


def intrinsic_distance(t: SpanningTree, x: int, y: int) -> int:
    return int(_du(t.parent, t.depth, _check(t, x), _check(t, y)))


def diameter_sq(points) -> int:
    """Exact squared Euclidean diameter of integer points."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.int64).reshape(-1, 2))
    return int(_diam2(pts))


def schramm_distance_sq(t: SpanningTree, x: int, y: int) -> int:
    p = tree_path(t, x, y).vertices
    if not t.has_coord[p].all():
        raise ValueError("path passes through a vertex without lattice position")
    return diameter_sq(t.coords[p])


def schramm_distance(t: SpanningTree, x: int, y: int) -> float:
    """Euclidean diameter of the tree path between ``x`` and ``y``."""
    return math.sqrt(schramm_distance_sq(t, x, y))


def pair_metrics(t: SpanningTree, xs, ys):
    """``(d_U, d^S squared)`` for vertex pairs; ``-1`` where d^S is undefined."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    return _pairs_kernel(t.parent, t.depth, t.coords, t.has_coord, xs, ys)


def bfs_distances(t: SpanningTree, x: int, maxd: int | None = None, stop_at_edge: bool = False):
    """``(nodes, distances, truncation_distance)`` of the intrinsic ball.

    With ``stop_at_edge`` the search does not expand past window-edge nodes.
    """
    ip, ix = t.adjacency
    maxd = t.n if maxd is None else int(maxd)
    return _bfs(ip, ix, _check(t, x), maxd, t.window_edge, stop_at_edge)


def intrinsic_ball(t: SpanningTree, x: int, r: float):
    """``B_U(x, r)`` as ``(BallStats, vertices)``.

    ``truncated`` is set when the ball reaches the window edge (or the wired
    root), in which case the true ball may extend beyond what was enumerated.
    """
    R = int(math.floor(r))
    if R < 0:
        raise ValueError("radius must be non-negative")
    nodes, dist, trunc = bfs_distances(t, x, R)
    stats = BallStats(int(x), float(r), int(len(nodes)), int(np.count_nonzero(dist == R)),
                      trunc >= 0)
    return stats, nodes


def ball_profile(t: SpanningTree, x: int, rmax: int):
    """Volumes ``|B_U(x, r)|`` for ``r = 0..rmax`` and the truncation radius.

    Entries with ``r >= trunc`` are window-clipped; ``trunc`` is ``None`` when
    no clipping occurred.
    """
    nodes, dist, trunc = bfs_distances(t, x, int(rmax))
    counts = np.bincount(dist, minlength=int(rmax) + 1)[: int(rmax) + 1]
    return np.cumsum(counts), (None if trunc < 0 else int(trunc))


def covering_number(t: SpanningTree, r: float, s: float, center: int | None = None) -> int:
    """Size of a greedy farthest-point ``s``-cover of ``B_U(center, r)``.

    This is an upper bound for the minimal number of ``s``-balls needed; the
    chosen centres are pairwise more than ``s`` apart, so the value is also at
    most the minimal number of ``s/2``-balls needed.
    """
    if not 0 < s <= r:
        raise ValueError("need 0 < s <= r")
    c = t.root if center is None else _check(t, center)
    R, S = int(math.floor(r)), int(math.floor(s))
    ball, _, trunc = bfs_distances(t, c, R)
    if trunc >= 0:
        raise TruncationError("ball for covering number is window-clipped", "covering_number")
    pos = {int(v): i for i, v in enumerate(ball)}
    mind = np.full(len(ball), np.iinfo(np.int64).max)
    chosen = c
    count = 0
    while True:
        count += 1
        nodes, dist, _ = bfs_distances(t, chosen, R + R)
        for v, d in zip(nodes.tolist(), dist.tolist()):
            i = pos.get(v)
            if i is not None and d < mind[i]:
                mind[i] = d
        far = int(np.argmax(mind))
        if mind[far] <= S:
            return count
        chosen = int(ball[far])


def uniform_volume_check(t: SpanningTree, lam: float, n: int, *, n_radii: int = 6,
                         spacing: int | None = None):
    """Evaluate ``lam^-1 R^d_f <= |B_U(x,R)| <= lam R^d_f`` over centres and radii.

    Centres are the origin plus the sub-lattice of spacing ``ceil(n/8)`` inside
    ``B_E(0, n)``; radii are geometric between ``exp(-lam^(1/40)) n^kappa`` and
    ``n^kappa``.  Returns ``(holds, witness)`` where the witness records the
    centre and radius with the worst normalised volume.
    """
    spacing = spacing or max(1, math.ceil(n / 8))
    top = n ** KAPPA
    low = math.exp(-lam ** (1 / 40)) * top
    radii = np.geomspace(low, top, n_radii)
    centres = [(0, 0)]
    k = n // spacing
    for i in range(-k, k + 1):
        for j in range(-k, k + 1):
            p = (i * spacing, j * spacing)
            if (i, j) != (0, 0) and p[0] ** 2 + p[1] ** 2 <= n * n:
                centres.append(p)
    worst = None
    for p in centres:
        v = t.node(p)
        vols, trunc = ball_profile(t, v, int(math.floor(top)))
        for R in radii:
            Ri = int(math.floor(R))
            if trunc is not None and Ri >= trunc:
                raise TruncationError(f"ball at {p} radius {R:.3g} is window-clipped",
                                      "uniform_volume")
            vol = int(vols[Ri])
            target = R ** D_F
            score = min(vol * lam / target, lam * target / vol)
            if worst is None or score < worst["score"]:
                worst = {"center": p, "radius": float(R), "volume": vol,
                         "lower": target / lam, "upper": lam * target, "score": score}
    return bool(worst["score"] >= 1.0), worst


def ball_inclusion_stats(samples, r: float, lam: float):
    """Empirical frequencies of the two ball non-inclusion events.

    First: ``B_U(0, r^kappa / lam)`` is not inside ``B_E(0, r)``.
    Second: ``B_E(0, r)`` is not inside ``B_U(0, lam r^kappa)``.
    Every tree must contain the origin; a window no larger than ``r`` is an
    error because the second event could not be decided.
    """
    rk = r ** KAPPA
    r2 = r * r
    first = second = 0
    total = 0
    for t in samples:
        if t.window is not None and t.window <= r:
            raise TruncationError("window must exceed r", "ball_inclusion")
        o = t.node((0, 0))
        nodes, dist, trunc = bfs_distances(t, o, int(math.floor(rk / lam)))
        if trunc >= 0:
            first += 1
        else:
            c = t.coords[nodes]
            first += bool(np.any(c[:, 0] ** 2 + c[:, 1] ** 2 > r2))
        inside = np.flatnonzero(t.has_coord & (t.coords[:, 0] ** 2 + t.coords[:, 1] ** 2 <= r2))
        if o == t.root:
            du = t.depth[inside]
        else:
            du = np.array([intrinsic_distance(t, o, v) for v in inside])
        second += bool(np.any(du > lam * rk))
        total += 1
    if total == 0:
        raise ValueError("no samples")
    return first / total, second / total


def ball_stats_rows(t: SpanningTree, stats, stat: str = "ball_volume"):
    """Rows ``stat,center_x,center_y,radius,value,truncated`` for BallStats."""
    rows = []
    for b in stats:
        p = t.point(b.center) or ("", "")
        rows.append((stat, p[0], p[1], b.radius, b.volume, int(b.truncated)))
    return rows
