"""Undirected simple graphs in CSR form, components and BFS distances."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

UNREACHED = -1


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``indices[indptr[u]:indptr[u+1]]`` lists the neighbors of ``u`` in
    increasing order. Each undirected edge is stored twice.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges, *, check: bool = True) -> "Graph":
        """Build from an iterable / ``(m, 2)`` array of undirected edges.

        With ``check`` self-loops, duplicate edges and out-of-range ids raise
        ``GraphError``; without it duplicates are merged silently (self-loops
        are still rejected).
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise GraphError(f"node id out of range for n={n}")
        if np.any(e[:, 0] == e[:, 1]):
            raise GraphError("self-loop")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = np.unique(lo * n + hi)
        if check and keys.size != e.shape[0]:
            raise GraphError("duplicate edge")
        lo, hi = keys // n, keys % n
        return cls._from_canonical(n, lo, hi)

    @classmethod
    def _from_canonical(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst.astype(np.int64))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        self._check_node(v)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def with_edge(self, u: int, v: int) -> "Graph":
        if u == v or self.has_edge(u, v):
            raise GraphError(f"cannot add edge ({u}, {v})")
        return Graph.from_edges(self.n, np.vstack([self.edges(), [[u, v]]]))

    def without_edge(self, u: int, v: int) -> "Graph":
        if not self.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) not present")
        e = self.edges()
        lo, hi = min(u, v), max(u, v)
        keep = ~((e[:, 0] == lo) & (e[:, 1] == hi))
        return Graph._from_canonical(self.n, e[keep, 0], e[keep, 1])

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise GraphError(f"node {u} out of range for n={self.n}")

    def to_csr(self) -> csr_matrix:
        data = np.ones(self.indices.size, dtype=np.int8)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    # -- edge-list text format: "n m" then m lines "u v" with u < v

    def dump(self, path) -> None:
        e = self.edges()
        lines = [f"{self.n} {e.shape[0]}"]
        lines.extend(f"{u} {v}" for u, v in e.tolist())
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")

    @classmethod
    def load(cls, path) -> "Graph":
        tokens = Path(path).read_text(encoding="ascii").split()
        if len(tokens) < 2:
            raise GraphError(f"{path}: missing header")
        n, m = int(tokens[0]), int(tokens[1])
        body = np.array(tokens[2:], dtype=np.int64)
        if body.size != 2 * m:
            raise GraphError(f"{path}: expected {m} edges, found {body.size / 2:g}")
        e = body.reshape(m, 2)
        if np.any(e[:, 0] >= e[:, 1]):
            raise GraphError(f"{path}: edges must be written with u < v")
        return cls.from_edges(n, e)


def degree(g: Graph, u: int) -> int:
    g._check_node(u)
    return int(g.indptr[u + 1] - g.indptr[u])


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    component_id: np.ndarray
    component_sizes: np.ndarray
    giant_id: int | None

    @property
    def giant_size(self) -> int:
        return 0 if self.giant_id is None else int(self.component_sizes[self.giant_id])

    def giant_nodes(self) -> np.ndarray:
        if self.giant_id is None:
            return np.zeros(0, dtype=np.int64)
        return np.flatnonzero(self.component_id == self.giant_id)

    def in_giant(self) -> np.ndarray:
        return self.component_id == self.giant_id


def components(g: Graph) -> ComponentLabeling:
    """Connected components, numbered in order of their lowest node id."""
    if g.n == 0:
        return ComponentLabeling(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), None)
    _, raw = connected_components(g.to_csr(), directed=False)
    # renumber by first appearance so ids follow the lowest member
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty_like(first)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    labels = rank[inverse].astype(np.int64)
    sizes = np.bincount(labels)
    return ComponentLabeling(labels, sizes, int(np.argmax(sizes)))


def expand(indptr: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """CSR slot indices of all adjacency entries of ``nodes``, row by row."""
    starts = indptr[nodes]
    counts = indptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.cumsum(counts) - counts
    return np.repeat(starts - offsets, counts) + np.arange(total, dtype=np.int64)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every node; ``UNREACHED`` (-1) if none.

    Level-synchronous, no recursion.
    """
    g._check_node(source)
    dist = np.full(g.n, UNREACHED, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        nbrs = g.indices[expand(g.indptr, frontier)]
        nbrs = np.unique(nbrs[dist[nbrs] == UNREACHED])
        dist[nbrs] = level
        frontier = nbrs
    return dist
