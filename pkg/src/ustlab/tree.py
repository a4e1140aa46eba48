"""Rooted spanning trees stored as parent arrays, plus the ``ust-v1`` format."""
from __future__ import annotations

import math
import os

import numba
import numpy as np

from .lattice import FREE, WIRED, Graph, GridBox, ceil_side

__all__ = [
    "SpanningTree",
    "IntegrityError",
    "SnapshotParseError",
    "TruncationError",
    "save_snapshot",
    "load_snapshot",
    "format_snapshot",
    "parse_snapshot",
]


class IntegrityError(ValueError):
    """A parent structure that is not a rooted spanning tree."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class SnapshotParseError(ValueError):
    def __init__(self, message, line, column=None):
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class TruncationError(RuntimeError):
    """A statistic could not be computed without leaving the sampling window."""

    def __init__(self, message, statistic=None, partial=None):
        super().__init__(message)
        self.statistic = statistic
        self.partial = partial


@numba.njit(cache=True, nogil=True)
def _depths(parent, root):
    n = parent.shape[0]
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    stack = np.empty(n + 1, dtype=np.int64)
    for v in range(n):
        if depth[v] >= 0:
            continue
        top = 0
        u = v
        while depth[u] < 0:
            stack[top] = u
            top += 1
            if top > n:
                return depth, u
            u = parent[u]
            if u < 0 or u >= n:
                return depth, stack[top - 1]
        d = depth[u]
        while top > 0:
            top -= 1
            d += 1
            depth[stack[top]] = d
    return depth, -1


@numba.njit(cache=True, nogil=True)
def _non_edges(indptr, indices, parent, root):
    for v in range(parent.shape[0]):
        if v == root:
            continue
        p = parent[v]
        found = False
        for k in range(indptr[v], indptr[v + 1]):
            if indices[k] == p:
                found = True
                break
        if not found:
            return v
    return -1


def _csr_by_key(keys, values, n):
    order = np.argsort(keys, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, keys + 1, 1)
    return np.cumsum(indptr), values[order]


class SpanningTree:
    """A spanning tree of ``graph`` given by ``parent`` (root maps to itself).

    Carries the intrinsic metric (through ``depth`` and the parent links),
    counting measure and identity embedding of the underlying lattice graph.
    ``window`` is the half-width of the square inside which statistics are
    trusted; ``None`` means the whole graph is trusted.
    """

    def __init__(self, graph: Graph, parent, root: int, *, box: GridBox | None = None,
                 window: int | None = None, seed: int = 0, margin: float = 1.0):
        self.graph = graph
        self.parent = np.asarray(parent, dtype=np.int64)
        self.root = int(root)
        self.box = box
        self.window = window
        self.seed = int(seed)
        self.margin = float(margin)
        if self.parent.shape != (graph.n,):
            raise IntegrityError("parent array does not match graph size")
        if self.parent[self.root] != self.root:
            raise IntegrityError("root must be its own parent", self.root)
        depth, bad = _depths(self.parent, self.root)
        if bad >= 0:
            raise IntegrityError(f"parent cycle or dangling link through vertex {bad}", int(bad))
        self.depth = depth
        self._children = None
        self._adj = None
        self._edge_mask = None

    # --- structure -------------------------------------------------------
    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def coords(self) -> np.ndarray:
        return self.graph.coords

    @property
    def has_coord(self) -> np.ndarray:
        return self.graph.has_coord

    @property
    def boundary(self) -> str:
        return self.box.boundary if self.box is not None else FREE

    def node(self, p) -> int:
        if self.box is not None:
            return self.box.node(p)
        return self.graph.node(p)

    def point(self, v: int):
        return self.graph.point(v)

    @property
    def children(self):
        """CSR ``(indptr, indices)`` of child lists."""
        if self._children is None:
            v = np.arange(self.n)
            mask = v != self.root
            self._children = _csr_by_key(self.parent[mask], v[mask], self.n)
        return self._children

    @property
    def adjacency(self):
        """CSR ``(indptr, indices)`` of the undirected tree."""
        if self._adj is None:
            v = np.arange(self.n)
            mask = v != self.root
            a = np.concatenate([v[mask], self.parent[mask]])
            b = np.concatenate([self.parent[mask], v[mask]])
            self._adj = _csr_by_key(a, b, self.n)
        return self._adj

    def degree(self, v=None):
        deg = np.diff(self.adjacency[0])
        return deg if v is None else int(deg[v])

    def edge_count(self) -> int:
        return self.n - 1

    def edges(self) -> np.ndarray:
        v = np.arange(self.n)
        mask = v != self.root
        return np.stack([v[mask], self.parent[mask]], axis=1)

    def edge_set(self) -> frozenset:
        e = self.edges()
        return frozenset(zip(np.minimum(e[:, 0], e[:, 1]).tolist(),
                             np.maximum(e[:, 0], e[:, 1]).tolist()))

    @property
    def window_edge(self) -> np.ndarray:
        """Vertices at which window-restricted statistics are truncated."""
        if self._edge_mask is None:
            mask = ~self.has_coord.copy()
            if self.window is not None:
                mask |= np.max(np.abs(self.coords), axis=1) >= self.window
            self._edge_mask = mask
        return self._edge_mask

    def validate(self):
        """Raise :class:`IntegrityError` unless this is a spanning tree of the graph."""
        bad = _non_edges(self.graph.indptr, self.graph.indices, self.parent, self.root)
        if bad >= 0:
            raise IntegrityError(f"vertex {bad} linked to non-neighbour {self.parent[bad]}", bad)
        kids = np.flatnonzero(np.arange(self.n) != self.root)
        if np.any(self.depth[kids] != self.depth[self.parent[kids]] + 1):
            raise IntegrityError("depth is not parent depth plus one")
        return True

    def reroot(self, new_root: int) -> "SpanningTree":
        """Same tree, parent links reversed along the path to ``new_root``."""
        parent = self.parent.copy()
        v = int(new_root)
        prev = v
        while True:
            nxt = int(self.parent[v])
            parent[v] = prev
            if v == self.root:
                break
            prev, v = v, nxt
        return SpanningTree(self.graph, parent, new_root, box=self.box, window=self.window,
                            seed=self.seed, margin=self.margin)

    def __eq__(self, other):
        if not isinstance(other, SpanningTree):
            return NotImplemented
        return (self.root == other.root and self.n == other.n
                and np.array_equal(self.parent, other.parent)
                and self.boundary == other.boundary and self.window == other.window)

    def __repr__(self):
        return (f"SpanningTree(n={self.n}, root={self.root}, boundary={self.boundary!r}, "
                f"window={self.window})")


# --- ust-v1 snapshots ----------------------------------------------------------

def _rep_point(tree: SpanningTree, v: int, other: int):
    """Lattice representative for ``v``; the wired root is named by a
    boundary lattice neighbour of ``other``."""
    if tree.has_coord[v]:
        return tree.point(v)
    x, y = tree.point(other)
    s = tree.box.side
    for q in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
        if max(abs(q[0]), abs(q[1])) == s:
            return q
    raise IntegrityError(f"vertex {other} is not adjacent to the wired boundary", other)


def format_snapshot(tree: SpanningTree) -> str:
    if tree.box is None:
        raise ValueError("snapshots are defined for trees of a GridBox")
    side = tree.window if tree.window is not None else tree.box.side
    lines = [f"ust-v1 side={side} bc={tree.boundary} seed={tree.seed} margin={tree.margin!r}"]
    for v in range(tree.n):
        p = int(tree.parent[v])
        if v == p:
            anchor = int(tree.adjacency[1][tree.adjacency[0][v]]) if not tree.has_coord[v] else v
            xy = _rep_point(tree, v, anchor)
            pxy = xy
        else:
            xy = _rep_point(tree, v, p)
            pxy = _rep_point(tree, p, v)
        lines.append(f"{xy[0]} {xy[1]} {pxy[0]} {pxy[1]}")
    return "\n".join(lines) + "\n"


def save_snapshot(tree: SpanningTree, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_snapshot(tree))


def _parse_header(line: str):
    parts = line.split()
    if not parts or parts[0] != "ust-v1":
        raise SnapshotParseError("expected 'ust-v1' header", 1, 1)
    fields = {}
    col = len(parts[0]) + 2
    for tok in parts[1:]:
        if "=" not in tok:
            raise SnapshotParseError(f"malformed header field {tok!r}", 1, col)
        k, v = tok.split("=", 1)
        fields[k] = (v, col)
        col += len(tok) + 1
    for key in ("side", "bc", "seed", "margin"):
        if key not in fields:
            raise SnapshotParseError(f"missing header field {key!r}", 1)
    try:
        side = int(fields["side"][0])
        seed = int(fields["seed"][0])
        margin = float(fields["margin"][0])
    except ValueError as exc:
        raise SnapshotParseError(f"bad header value ({exc})", 1) from None
    bc = fields["bc"][0]
    if bc not in (WIRED, FREE):
        raise SnapshotParseError(f"unknown boundary condition {bc!r}", 1, fields["bc"][1])
    if side < 1 or margin < 1 or not math.isfinite(margin):
        raise SnapshotParseError("side must be >= 1 and margin >= 1", 1)
    return side, bc, seed, margin


def parse_snapshot(text: str) -> SpanningTree:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotParseError("empty snapshot", 1)
    side, bc, seed, margin = _parse_header(lines[0])
    box = GridBox(ceil_side(margin, side), bc)
    g = box.graph()
    n = g.n
    if len(lines) - 1 != n:
        raise SnapshotParseError(f"expected {n} vertex lines, found {len(lines) - 1}",
                                 len(lines) + 1 if len(lines) - 1 < n else n + 2)
    parent = np.full(n, -1, dtype=np.int64)
    root = -1
    for lineno, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != 4:
            raise SnapshotParseError(f"expected 4 integers, found {len(toks)} fields", lineno)
        vals = []
        col = 1
        for tok in toks:
            col = line.index(tok, col - 1) + 1
            try:
                vals.append(int(tok))
            except ValueError:
                raise SnapshotParseError(f"not an integer: {tok!r}", lineno, col) from None
            col += len(tok)
        try:
            v = box.node(vals[:2])
            p = box.node(vals[2:])
        except ValueError as exc:
            raise SnapshotParseError(str(exc), lineno) from None
        if parent[v] != -1:
            raise SnapshotParseError(f"vertex {tuple(vals[:2])} listed twice", lineno)
        parent[v] = p
        if v == p:
            if root != -1:
                raise IntegrityError(f"second root at line {lineno}", v)
            root = v
        elif p not in g.adj(v):
            raise IntegrityError(f"line {lineno}: parent is not a lattice neighbour", v)
    if root == -1:
        raise IntegrityError("no root line (a vertex that is its own parent)")
    return SpanningTree(g, parent, root, box=box, window=side, seed=seed, margin=margin)


def load_snapshot(path) -> SpanningTree:
    with open(os.fspath(path)) as fh:
        return parse_snapshot(fh.read())
