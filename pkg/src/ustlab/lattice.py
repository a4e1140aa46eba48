"""Boxes of Z^2, graph adjacency, seeded random streams and lattice walks.

Vertices are plain ``(x, y)`` integer tuples at the API surface and integer
node ids inside the numerical kernels.  A :class:`Graph` stores adjacency in
CSR form; multi-edges are represented by repeated entries so that a uniform
choice among the entries of a row is exactly a simple random walk step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

__all__ = [
    "WIRED",
    "FREE",
    "Graph",
    "GridBox",
    "RandomSource",
    "as_generator",
    "rect_graph",
    "path_graph",
    "neighbors",
    "srw_step",
    "srw_path",
    "exit_time",
    "dist2",
    "linf",
    "boustrophedon",
]

WIRED = "wired"
FREE = "free"

# E, W, N, S -- the order used for every lattice step decision
STEPS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


class RandomSource:
    """Replayable random stream identified by ``(seed, stream_index)``.

    The pair is hashed with :class:`numpy.random.SeedSequence` (the seed as
    entropy, the stream index as spawn key) and drives a PCG64 generator.
    SeedSequence mixing is the documented avalanche hash of numpy, so streams
    with neighbouring indices are decorrelated.  No OS entropy is consulted.

    Every stochastic routine draws whole 64-bit words through
    ``Generator.random()``; a lattice step consumes exactly one word.
    """

    def __init__(self, seed: int, stream_index: int = 0):
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, stream_index: int) -> "RandomSource":
        return RandomSource(self.seed, stream_index)

    def random(self, size=None):
        return self.generator.random(size)

    def words(self, n: int) -> np.ndarray:
        """Raw 64-bit outputs of the underlying bit generator."""
        return self.generator.bit_generator.random_raw(n)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream_index={self.stream_index})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("expected a RandomSource or numpy Generator, got %r" % type(rng))


def dist2(p, q) -> int:
    """Squared Euclidean distance, exact in integers."""
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return dx * dx + dy * dy


def linf(p, q=(0, 0)) -> int:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


@dataclass(eq=False)
class Graph:
    """Undirected multigraph in CSR form with optional lattice coordinates.

    ``coords[v]`` is meaningful only when ``has_coord[v]``; a contracted
    node (the wired root) has no single lattice position.
    """

    indptr: np.ndarray
    indices: np.ndarray
    coords: np.ndarray
    has_coord: np.ndarray
    super_node: int = -1
    name: str = "graph"
    _lookup: dict | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def degree(self, v=None):
        deg = np.diff(self.indptr)
        return deg if v is None else int(deg[v])

    def adj(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """Edge list ``(u, v)`` with ``u < v``, multi-edges repeated once each."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        dst = self.indices
        keep = src < dst
        return np.stack([src[keep], dst[keep]], axis=1)

    def node(self, p) -> int:
        """Node id of lattice point ``p``; raises ``KeyError`` if absent."""
        if self._lookup is None:
            self._lookup = {
                (int(x), int(y)): i
                for i, ((x, y), ok) in enumerate(zip(self.coords, self.has_coord))
                if ok
            }
        return self._lookup[(int(p[0]), int(p[1]))]

    def point(self, v: int):
        if not self.has_coord[v]:
            return None
        return (int(self.coords[v, 0]), int(self.coords[v, 1]))

    def laplacian(self) -> np.ndarray:
        """Dense combinatorial Laplacian (small graphs only)."""
        L = np.zeros((self.n, self.n))
        for u in range(self.n):
            for v in self.adj(u):
                L[u, v] -= 1.0
                L[u, u] += 1.0
        return L

    def contract(self, nodes) -> "Graph":
        """Identify ``nodes`` into a single new node appended last.

        Edges between contracted nodes disappear; edges from the rest into the
        contracted set survive as (possibly parallel) edges to the new node.
        """
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        merged = np.zeros(self.n, dtype=bool)
        merged[nodes] = True
        keep_ids = np.flatnonzero(~merged)
        new_id = np.empty(self.n, dtype=np.int64)
        new_id[keep_ids] = np.arange(len(keep_ids))
        s = len(keep_ids)
        new_id[merged] = s
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        a, b = new_id[src], new_id[self.indices]
        keep = a != b
        a, b = a[keep], b[keep]
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
        indptr = np.zeros(s + 2, dtype=np.int64)
        np.add.at(indptr, a + 1, 1)
        indptr = np.cumsum(indptr)
        coords = np.zeros((s + 1, 2), dtype=np.int64)
        coords[:s] = self.coords[keep_ids]
        has = np.zeros(s + 1, dtype=bool)
        has[:s] = self.has_coord[keep_ids]
        return Graph(indptr, b.astype(np.int64), coords, has, super_node=s,
                     name=self.name + "/contracted")


def _graph_from_points(points: np.ndarray, name: str) -> Graph:
    """Nearest-neighbour graph on a set of lattice points."""
    lookup = {(int(x), int(y)): i for i, (x, y) in enumerate(points)}
    indptr = [0]
    indices = []
    for x, y in points:
        for dx, dy in STEPS:
            j = lookup.get((int(x + dx), int(y + dy)))
            if j is not None:
                indices.append(j)
        indptr.append(len(indices))
    g = Graph(np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
              np.asarray(points, dtype=np.int64), np.ones(len(points), dtype=bool), name=name)
    g._lookup = lookup
    return g


def rect_graph(rows: int, cols: int) -> Graph:
    """Free ``rows x cols`` grid graph with points ``(c, r)``."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    pts = np.array([(c, r) for r in range(rows) for c in range(cols)], dtype=np.int64)
    return _graph_from_points(pts, f"grid{rows}x{cols}")


def path_graph(n: int) -> Graph:
    """Points ``(0,0), (1,0), ..., (n-1,0)``."""
    return rect_graph(1, n)


class GridBox:
    """The box ``[-side, side]^2`` of Z^2 with free or wired boundary.

    Under the wired condition all vertices with ``max(|x|,|y|) == side`` are
    one node (the last node id), which serves as the root for Wilson's
    algorithm.
    """

    def __init__(self, side: int, boundary: str = FREE):
        if side < 1:
            raise ValueError("side must be a positive integer")
        if boundary not in (WIRED, FREE):
            raise ValueError("boundary must be 'wired' or 'free'")
        self.side = int(side)
        self.boundary = boundary
        self._graph = None

    @property
    def width(self) -> int:
        return 2 * self.side + 1

    @property
    def n_vertices(self) -> int:
        if self.boundary == FREE:
            return self.width ** 2
        return (self.width - 2) ** 2 + 1

    def contains(self, p) -> bool:
        return linf(p) <= self.side

    def on_boundary(self, p) -> bool:
        return linf(p) == self.side

    def node(self, p) -> int:
        """Node id of ``p`` (boundary points alias the wired root)."""
        if not self.contains(p):
            raise ValueError(f"point {tuple(p)} outside box of side {self.side}")
        x, y = int(p[0]), int(p[1])
        s = self.side
        if self.boundary == FREE:
            return (y + s) * self.width + (x + s)
        if linf(p) == s:
            return self.root
        w = self.width - 2
        return (y + s - 1) * w + (x + s - 1)

    @property
    def root(self) -> int:
        if self.boundary != WIRED:
            raise AttributeError("free box has no wired root")
        return (self.width - 2) ** 2

    def graph(self) -> Graph:
        if self._graph is None:
            self._graph = self._build()
        return self._graph

    def _build(self) -> Graph:
        s, w = self.side, self.width
        xs, ys = np.meshgrid(np.arange(-s, s + 1), np.arange(-s, s + 1))
        coords = np.stack([xs.ravel(), ys.ravel()], axis=1).astype(np.int64)
        idx = np.arange(w * w).reshape(w, w)
        # CSR rows in E, W, N, S order for each vertex
        nbr = np.full((w, w, 4), -1, dtype=np.int64)
        nbr[:, :-1, 0] = idx[:, 1:]
        nbr[:, 1:, 1] = idx[:, :-1]
        nbr[:-1, :, 2] = idx[1:, :]
        nbr[1:, :, 3] = idx[:-1, :]
        nbr = nbr.reshape(-1, 4)
        valid = nbr >= 0
        indptr = np.zeros(w * w + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(valid.sum(axis=1))
        g = Graph(indptr, nbr[valid], coords, np.ones(w * w, dtype=bool),
                  name=f"box{s}/free")
        if self.boundary == FREE:
            return g
        on_edge = np.flatnonzero(np.max(np.abs(coords), axis=1) == s)
        gw = g.contract(on_edge)
        gw.name = f"box{s}/wired"
        return gw


def neighbors(box: GridBox, v) -> list:
    """Lattice neighbours of ``v`` inside the closed box, in E, W, N, S order.

    Under the wired condition the returned points are still lattice points;
    use :meth:`GridBox.node` to see the aliasing of boundary points onto the
    root.
    """
    if not box.contains(v):
        raise ValueError(f"point {tuple(v)} outside box of side {box.side}")
    out = []
    for dx, dy in STEPS:
        q = (int(v[0] + dx), int(v[1] + dy))
        if box.contains(q):
            out.append(q)
    return out


def srw_step(v, rng):
    """One simple-random-walk step on Z^2 consuming exactly one 64-bit word."""
    k = int(4.0 * as_generator(rng).random())
    return (int(v[0] + STEPS[k, 0]), int(v[1] + STEPS[k, 1]))


@numba.njit(cache=True, nogil=True)
def _srw_path(x0, y0, steps, rng):
    out = np.empty((steps + 1, 2), dtype=np.int64)
    out[0, 0] = x0
    out[0, 1] = y0
    x, y = x0, y0
    for i in range(steps):
        k = int(4.0 * rng.random())
        if k == 0:
            x += 1
        elif k == 1:
            x -= 1
        elif k == 2:
            y += 1
        else:
            y -= 1
        out[i + 1, 0] = x
        out[i + 1, 1] = y
    return out


def srw_path(start, steps: int, rng) -> np.ndarray:
    """``steps`` walk steps from ``start``; same word usage as :func:`srw_step`."""
    return _srw_path(int(start[0]), int(start[1]), int(steps), as_generator(rng))


def exit_time(path, center, r: float):
    """First index ``i`` with ``d_E(center, path[i]) > r``, or ``None``.

    Balls are closed, so a point at distance exactly ``r`` is still inside.
    """
    p = np.asarray(path, dtype=np.int64)
    d2 = (p[:, 0] - center[0]) ** 2 + (p[:, 1] - center[1]) ** 2
    if float(r) == int(r):
        outside = d2 > int(r) ** 2
    else:
        outside = d2 > r * r
    hits = np.flatnonzero(outside)
    return int(hits[0]) if len(hits) else None


def boustrophedon(box: GridBox) -> np.ndarray:
    """Node ids of the box in serpentine row order, wired root excluded."""
    w = box.width if box.boundary == FREE else box.width - 2
    ids = np.arange(w * w, dtype=np.int64).reshape(w, w)
    ids[1::2] = ids[1::2, ::-1]
    return ids.ravel()


def ceil_side(margin: float, side: int) -> int:
    return int(math.ceil(margin * side - 1e-12))
