"""Simple random walk on a spanning tree and its deterministic transition densities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .lattice import as_generator
from .metrics import bfs_distances, intrinsic_distance
from .tree import SpanningTree, TruncationError

__all__ = [
    "WalkTrace",
    "HeatKernelVector",
    "HeatKernelSeries",
    "srw_on_tree",
    "exit_time_from_ball",
    "displacement_profile",
    "heat_kernel_iterate",
    "effective_resistance",
    "walk_range_profile",
    "range_rows",
]


@dataclass
class WalkTrace:
    """Positions of a walk and per-edge crossing counts.

    ``crossings[v]`` counts traversals of the edge between ``v`` and its parent.
    """

    positions: np.ndarray
    crossings: np.ndarray

    @property
    def step_count(self) -> int:
        return len(self.positions) - 1

    def crossing_map(self) -> dict:
        return {int(v): int(c) for v, c in enumerate(self.crossings) if c}


@dataclass
class HeatKernelVector:
    time: int
    nodes: np.ndarray
    mass: np.ndarray
    laziness: float

    def as_dict(self) -> dict:
        return {int(v): float(m) for v, m in zip(self.nodes, self.mass) if m}


@dataclass
class HeatKernelSeries:
    """Return probabilities ``p_t(start, start)`` for ``t = 0..tmax``.

    ``leaked[t]`` is the mass parked on the frontier of the computational
    domain at time ``t``; it bounds the error of every entry.
    """

    start: int
    laziness: float
    p_return: np.ndarray
    leaked: np.ndarray
    snapshots: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.p_return))


@numba.njit(cache=True, nogil=True)
def _walk(ip, ix, parent, start, steps, rng, edge_mask, positions, crossings):
    v = start
    positions[0] = v
    for i in range(steps):
        d = ip[v + 1] - ip[v]
        w = ix[ip[v] + int(d * rng.random())]
        if parent[w] == v:
            crossings[w] += 1
        else:
            crossings[v] += 1
        v = w
        positions[i + 1] = v
        if edge_mask[v]:
            return i + 1
    return steps


def srw_on_tree(t: SpanningTree, start: int, steps: int, rng) -> WalkTrace:
    """``steps`` steps of the simple random walk on ``t`` from ``start``.

    Reaching the window edge raises :class:`TruncationError` carrying the
    partial trace.
    """
    ip, ix = t.adjacency
    positions = np.empty(int(steps) + 1, dtype=np.int64)
    crossings = np.zeros(t.n, dtype=np.int64)
    done = _walk(ip, ix, t.parent, int(start), int(steps), as_generator(rng), t.window_edge,
                 positions, crossings)
    trace = WalkTrace(positions[:done + 1], crossings)
    if done < steps or (steps == 0 and t.window_edge[start]):
        raise TruncationError(f"walk reached the window edge after {done} steps", "srw",
                              partial=trace)
    return trace


@numba.njit(cache=True, nogil=True)
def _exit_times(ip, ix, depth, start, R, count, rng, budget):
    out = np.empty(count, dtype=np.int64)
    for k in range(count):
        v = start
        n = 0
        while depth[v] <= R:
            d = ip[v + 1] - ip[v]
            v = ix[ip[v] + int(d * rng.random())]
            n += 1
            if n > budget:
                n = -1
                break
        out[k] = n
    return out


def exit_time_from_ball(t: SpanningTree, R: float, rng, replicas: int = 1,
                        *, budget: int = 10**10) -> np.ndarray:
    """Exit times of the walk from the root out of the closed ball ``B_U(root, R)``.

    The walk leaves when it first stands at intrinsic distance greater than
    ``R``.  The ball must not touch the window edge.
    """
    Ri = int(math.floor(R))
    _, _, trunc = bfs_distances(t, t.root, Ri)
    if trunc >= 0:
        raise TruncationError(f"B_U(0,{R}) reaches the window edge", "exit_time")
    ip, ix = t.adjacency
    out = _exit_times(ip, ix, t.depth, t.root, Ri, int(replicas), as_generator(rng), budget)
    if np.any(out < 0):
        raise RuntimeError("exit-time walk exceeded its step budget")
    return out


@numba.njit(cache=True, nogil=True)
def _displacement(ip, ix, depth, start, times, rng, edge_mask):
    out = np.empty(times.shape[0], dtype=np.int64)
    v = start
    n = 0
    k = 0
    while k < times.shape[0]:
        while n < times[k]:
            d = ip[v + 1] - ip[v]
            v = ix[ip[v] + int(d * rng.random())]
            n += 1
            if edge_mask[v]:
                return out[:k], False
        out[k] = depth[v]
        k += 1
    return out, True


def displacement_profile(t: SpanningTree, times, rng) -> np.ndarray:
    """Intrinsic distance from the root of one walk observed at sorted ``times``."""
    times = np.asarray(times, dtype=np.int64)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    ip, ix = t.adjacency
    out, ok = _displacement(ip, ix, t.depth, t.root, times, as_generator(rng), t.window_edge)
    if not ok:
        raise TruncationError("walk reached the window edge", "displacement", partial=out)
    return out


@numba.njit(cache=True, nogil=True)
def _heat(lip, lix, inv_deg, sticky, start, tmax, a, record, snaps):
    m = lip.shape[0] - 1
    cur = np.zeros(m)
    nxt = np.zeros(m)
    cur[start] = 1.0
    p_ret = np.empty(tmax + 1)
    leak = np.empty(tmax + 1)
    p_ret[0] = 1.0
    leak[0] = 0.0
    r = 0
    if record.shape[0] > 0 and record[0] == 0:
        snaps[0, :] = cur
        r = 1
    for t in range(1, tmax + 1):
        nxt[:] = 0.0
        for u in range(m):
            mu = cur[u]
            if mu == 0.0:
                continue
            if sticky[u]:
                nxt[u] += mu
                continue
            nxt[u] += a * mu
            share = (1.0 - a) * mu * inv_deg[u]
            for k in range(lip[u], lip[u + 1]):
                nxt[lix[k]] += share
        cur, nxt = nxt, cur
        p_ret[t] = cur[start]
        s = 0.0
        for u in range(m):
            if sticky[u]:
                s += cur[u]
        leak[t] = s
        if r < record.shape[0] and record[r] == t:
            snaps[r, :] = cur
            r += 1
    return p_ret, leak


def heat_kernel_iterate(t: SpanningTree, start: int, tmax: int, laziness: float = 0.5, *,
                        radius: int | None = None, record=(), tol: float = 1e-9,
                        check: bool = True) -> HeatKernelSeries:
    """Exact distribution of the lazy walk on ``t`` started at ``start``.

    One step stays put with probability ``laziness`` and otherwise moves to a
    uniform tree neighbour.  The computation runs on the component of
    ``start`` inside the window (further cut at intrinsic ``radius`` when
    given); mass reaching the outer layer of that domain is held there.  When
    that held mass exceeds ``tol`` a :class:`TruncationError` names the first
    offending time.
    """
    if not 0 <= laziness < 1:
        raise ValueError("laziness must be in [0, 1)")
    maxd = t.n if radius is None else int(radius)
    nodes, dist, _ = bfs_distances(t, int(start), maxd, stop_at_edge=True)
    sticky_g = t.window_edge[nodes] | (dist >= maxd)
    local = np.full(t.n, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    ip, ix = t.adjacency
    counts = np.where(sticky_g, 0, np.diff(ip)[nodes])
    lip = np.zeros(len(nodes) + 1, dtype=np.int64)
    lip[1:] = np.cumsum(counts)
    lix = np.empty(lip[-1], dtype=np.int64)
    for i in np.flatnonzero(~sticky_g):
        v = nodes[i]
        lix[lip[i]:lip[i + 1]] = local[ix[ip[v]:ip[v + 1]]]
    if np.any(lix < 0):
        raise RuntimeError("heat-kernel domain is not closed under interior neighbours")
    deg = np.diff(ip)[nodes].astype(np.float64)
    inv_deg = np.where(deg > 0, 1.0 / np.maximum(deg, 1), 0.0)
    record = np.asarray(sorted(set(int(r) for r in record if 0 <= r <= tmax)), dtype=np.int64)
    snaps = np.zeros((len(record), len(nodes)))
    p_ret, leak = _heat(lip, lix, inv_deg, sticky_g, int(local[start]), int(tmax),
                        float(laziness), record, snaps)
    if check:
        bad = np.flatnonzero(leak > tol)
        if len(bad):
            raise TruncationError(f"domain leak {leak[bad[0]]:.3g} exceeds {tol:g} at t={bad[0]}",
                                  "heat_kernel", partial=int(bad[0]))
    series = HeatKernelSeries(int(start), float(laziness), p_ret, leak)
    series.snapshots = [HeatKernelVector(int(r), nodes, snaps[i], float(laziness))
                        for i, r in enumerate(record)]
    return series


def effective_resistance(t: SpanningTree, x: int, y: int) -> float:
    """Effective resistance between ``x`` and ``y`` with unit conductances.

    On a tree the series law makes this the intrinsic distance.
    """
    return float(intrinsic_distance(t, x, y))


@numba.njit(cache=True, nogil=True)
def _range(ip, ix, parent, start, marks, rng, edge_mask, out):
    v = start
    crossings = np.zeros(parent.shape[0], dtype=np.int64)
    n = 0
    for k in range(marks.shape[0]):
        while n < marks[k]:
            d = ip[v + 1] - ip[v]
            w = ix[ip[v] + int(d * rng.random())]
            if parent[w] == v:
                crossings[w] += 1
            else:
                crossings[v] += 1
            v = w
            n += 1
            if edge_mask[v]:
                return k
        out[k, :] = crossings
    return marks.shape[0]


def walk_range_profile(t: SpanningTree, steps, rng, start: int | None = None):
    """Cumulative edge crossing counts of one walk at each requested step count.

    Returns a list of ``(steps, crossings)``; ``crossings`` is indexed by the
    child endpoint of each edge.
    """
    marks = np.asarray(sorted(int(s) for s in steps), dtype=np.int64)
    start = t.root if start is None else int(start)
    ip, ix = t.adjacency
    out = np.zeros((len(marks), t.n), dtype=np.int64)
    done = _range(ip, ix, t.parent, start, marks, as_generator(rng), t.window_edge, out)
    if done < len(marks):
        raise TruncationError("range walk reached the window edge", "range",
                              partial=[(int(m), out[i]) for i, m in enumerate(marks[:done])])
    return [(int(m), out[i]) for i, m in enumerate(marks)]


def range_rows(t: SpanningTree, profile):
    """CSV rows ``x,y,px,py,crossings,snapshot_steps`` for crossed edges."""
    rows = []
    for steps, crossings in profile:
        for v in np.flatnonzero(crossings):
            p = int(t.parent[v])
            a, b = t.point(int(v)), t.point(p)
            if a is None or b is None:
                continue
            rows.append((a[0], a[1], b[0], b[1], int(crossings[v]), steps))
    return rows
