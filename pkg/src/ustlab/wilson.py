"""Loop erasure, Wilson's algorithm and the LERW growth sampler."""
from __future__ import annotations

import math
from fractions import Fraction

import numba
import numpy as np

from .lattice import WIRED, Graph, GridBox, as_generator, boustrophedon, ceil_side, rect_graph
from .tree import SpanningTree

__all__ = [
    "STEP_BUDGET",
    "StepBudgetExceeded",
    "loop_erase",
    "wilson",
    "wilson_batch",
    "sample_ust",
    "lerw_to_radius",
    "lerw_lengths",
    "count_spanning_trees",
]

STEP_BUDGET = 10**9


class StepBudgetExceeded(RuntimeError):
    pass


def loop_erase(walk) -> np.ndarray:
    """Chronological loop erasure of a lattice path given as ``(k, 2)`` points.

    Scanning forward, a revisit of a point cuts the path back to its first
    occurrence.  The result is self-avoiding and keeps both endpoints.
    """
    pts = np.asarray(walk, dtype=np.int64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("loop erasure of an empty walk")
    out = []
    where = {}
    for x, y in pts.tolist():
        key = (x, y)
        j = where.get(key)
        if j is None:
            where[key] = len(out)
            out.append(key)
        else:
            for q in out[j + 1:]:
                del where[q]
            del out[j + 1:]
    return np.asarray(out, dtype=np.int64)


@numba.njit(cache=True, nogil=True)
def _wilson_kernel(indptr, indices, in_tree, order, parent, rng, budget):
    for u in order:
        if in_tree[u]:
            continue
        v = u
        steps = 0
        while not in_tree[v]:
            d = indptr[v + 1] - indptr[v]
            w = indices[indptr[v] + int(d * rng.random())]
            parent[v] = w  # last exit overwrites: tracing later yields the loop erasure
            v = w
            steps += 1
            if steps > budget:
                return u
        v = u
        while not in_tree[v]:
            in_tree[v] = True
            v = parent[v]
    return -1


def _prepare(graph, roots, order):
    if isinstance(graph, GridBox):
        box = graph
        graph = box.graph()
    else:
        box = None
    roots = np.atleast_1d(np.asarray(roots, dtype=np.int64))
    if len(roots) == 0:
        raise ValueError("wilson needs at least one root")
    if len(roots) > 1:
        graph = graph.contract(roots)
        roots = np.array([graph.super_node])
        box = None
        if order is not None:
            raise ValueError("explicit order is not supported with several roots")
    if order is None:
        order = np.arange(graph.n, dtype=np.int64)
    order = np.asarray(order, dtype=np.int64)
    return graph, box, int(roots[0]), order


def wilson(graph, roots, order=None, rng=None, *, budget: int = STEP_BUDGET,
           seed: int = 0) -> SpanningTree:
    """Uniform spanning tree of ``graph`` rooted at ``roots`` (Wilson's algorithm).

    For each vertex of ``order`` not yet in the tree a random walk runs until it
    hits the tree and its loop erasure is attached.  Several roots are first
    contracted into one node, so the tree is uniform among spanning trees of
    the contracted graph.  ``graph`` may be a :class:`Graph` or a
    :class:`GridBox`.
    """
    graph, box, root, order = _prepare(graph, roots, order)
    in_tree = np.zeros(graph.n, dtype=np.bool_)
    in_tree[root] = True
    parent = np.full(graph.n, -1, dtype=np.int64)
    parent[root] = root
    bad = _wilson_kernel(graph.indptr, graph.indices, in_tree, order, parent,
                         as_generator(rng), budget)
    if bad >= 0:
        raise StepBudgetExceeded(f"walk from vertex {bad} exceeded {budget} steps")
    if not in_tree.all():
        raise ValueError("order does not cover every vertex")
    return SpanningTree(graph, parent, root, box=box,
                        window=box.side if box is not None else None, seed=seed)


@numba.njit(cache=True, nogil=True)
def _wilson_many(indptr, indices, root, order, count, rng, budget):
    n = indptr.shape[0] - 1
    out = np.empty((count, n), dtype=np.int64)
    in_tree = np.zeros(n, dtype=np.bool_)
    for k in range(count):
        in_tree[:] = False
        in_tree[root] = True
        out[k, root] = root
        if _wilson_kernel(indptr, indices, in_tree, order, out[k], rng, budget) >= 0:
            return out[:k]
    return out


def wilson_batch(graph: Graph, root: int, count: int, rng, order=None) -> np.ndarray:
    """``count`` independent Wilson trees as a ``(count, n)`` array of parents."""
    if order is None:
        order = np.arange(graph.n, dtype=np.int64)
    out = _wilson_many(graph.indptr, graph.indices, int(root), np.asarray(order, dtype=np.int64),
                       int(count), as_generator(rng), STEP_BUDGET)
    if len(out) != count:
        raise StepBudgetExceeded("a walk exceeded the step budget")
    return out


def sample_ust(side: int, margin: float = 2.0, rng=None, *, seed: int = 0) -> SpanningTree:
    """UST approximation around the origin, rooted at the origin.

    Wilson's algorithm runs on the wired box of half-width
    ``ceil(margin * side)`` in serpentine order, then the tree is re-rooted
    at ``(0, 0)``.  The whole tree is kept; ``window = side`` marks the region
    in which statistics are trusted.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    if margin < 1:
        raise ValueError("margin must be >= 1")
    box = GridBox(ceil_side(margin, side), WIRED)
    t = wilson(box, box.root, boustrophedon(box), rng, seed=seed)
    t = t.reroot(box.node((0, 0)))
    t.window = int(side)
    t.margin = float(margin)
    t._edge_mask = None
    return t


@numba.njit(cache=True, nogil=True)
def _lerw_kernel(r2, half, rng, budget, slot, buf):
    """Loop-erased walk from 0 until it leaves ``[-half, half]^2``.

    Returns the length of the erased path up to its first exit of the closed
    disc of squared radius ``r2``; ``buf[:len+1]`` holds that prefix.
    ``slot`` is a scratch grid (all -1 on entry and on exit).
    """
    w = 2 * half + 1
    length = 0
    buf[0, 0] = 0
    buf[0, 1] = 0
    slot[half * w + half] = 0
    x = 0
    y = 0
    steps = 0
    status = 0
    while True:
        k = int(4.0 * rng.random())
        if k == 0:
            x += 1
        elif k == 1:
            x -= 1
        elif k == 2:
            y += 1
        else:
            y -= 1
        steps += 1
        if steps > budget:
            status = -1
            break
        if x > half or x < -half or y > half or y < -half:
            length += 1
            buf[length, 0] = x
            buf[length, 1] = y
            break
        cell = (y + half) * w + (x + half)
        j = slot[cell]
        if j >= 0:
            for i in range(j + 1, length + 1):
                slot[(buf[i, 1] + half) * w + (buf[i, 0] + half)] = -1
            length = j
        else:
            length += 1
            buf[length, 0] = x
            buf[length, 1] = y
            slot[cell] = length
    for i in range(0, length + 1):
        bx = buf[i, 0]
        by = buf[i, 1]
        if -half <= bx <= half and -half <= by <= half:
            slot[(by + half) * w + (bx + half)] = -1
    if status < 0:
        return status
    for i in range(length + 1):
        if buf[i, 0] * buf[i, 0] + buf[i, 1] * buf[i, 1] > r2:
            return i
    return length


def _lerw_setup(r, margin):
    if r < 1:
        raise ValueError("r must be >= 1")
    if margin < 1:
        raise ValueError("margin must be >= 1")
    half = max(math.ceil(Fraction(margin) * Fraction(r)), math.ceil(r))
    # d2 > r^2 for an integer d2 is d2 > floor(r^2); Fraction keeps r^2 exact
    return int(half), int(math.floor(Fraction(r) ** 2))


def lerw_to_radius(r: float, margin: float = 4.0, rng=None, *, budget: int = STEP_BUDGET):
    """Loop-erased walk from the origin, cut at its first exit of ``B_E(0, r)``.

    A simple random walk runs until it leaves the box of half-width
    ``ceil(margin * r)``; its loop erasure is then truncated at the first
    point with ``d_E > r``.  The number of edges of the result samples
    ``|L_r|``.
    """
    half, r2 = _lerw_setup(r, margin)
    w = 2 * half + 1
    slot = np.full(w * w, -1, dtype=np.int64)
    buf = np.empty((w * w + 2, 2), dtype=np.int64)
    m = _lerw_kernel(r2, half, as_generator(rng), budget, slot, buf)
    if m == -1:
        raise StepBudgetExceeded(f"lerw exceeded {budget} steps")
    return buf[:m + 1].copy()


@numba.njit(cache=True, nogil=True)
def _lerw_many(r2, half, count, rng, budget, slot, buf):
    out = np.empty(count, dtype=np.int64)
    for k in range(count):
        out[k] = _lerw_kernel(r2, half, rng, budget, slot, buf)
        if out[k] < 0:
            return out[:k + 1]
    return out


def lerw_lengths(r: float, count: int, margin: float = 4.0, rng=None) -> np.ndarray:
    """``count`` independent samples of ``|L_r|`` (same law as :func:`lerw_to_radius`)."""
    half, r2 = _lerw_setup(r, margin)
    w = 2 * half + 1
    slot = np.full(w * w, -1, dtype=np.int64)
    buf = np.empty((w * w + 2, 2), dtype=np.int64)
    out = _lerw_many(r2, half, int(count), as_generator(rng), STEP_BUDGET, slot, buf)
    if len(out) != count or np.any(out < 0):
        raise StepBudgetExceeded("lerw sample failed")
    return out


def _bareiss_det(M) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def count_spanning_trees(graph) -> int:
    """Exact number of spanning trees (multi-edges counted separately).

    Accepts a :class:`Graph`, a :class:`GridBox` or a ``(rows, cols)`` pair.
    Uses the reduced Laplacian with the last vertex removed.
    """
    if isinstance(graph, tuple):
        graph = rect_graph(*graph)
    elif isinstance(graph, GridBox):
        graph = graph.graph()
    n = graph.n
    if n == 1:
        return 1
    L = [[0] * n for _ in range(n)]
    for u in range(n):
        for v in graph.adj(u):
            v = int(v)
            if v != u:
                L[u][v] -= 1
                L[u][u] += 1
    reduced = [row[:-1] for row in L[:-1]]
    return _bareiss_det(reduced)
