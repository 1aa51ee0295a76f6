"""Local one-or-two choice rules and the dissemination subgraph they induce.

Every node with at least one neighbor picks a first neighbor and, with
probability ``alpha``, a second one (possibly the same neighbor again). The
subgraph D keeps edge (u, v) of G iff u picked v or v picked u.

Randomness for node ``u`` comes from keyed uniforms on ``(seed, u, epoch)``,
so a row can be redrawn on its own after a topology change.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graph import Graph, GraphError, expand
from .rng import keyed_uniform

UNIFORM = "uniform"
DEGREE = "degree"
HEURISTICS = (UNIFORM, DEGREE)

NONE = -1
_SLOT_FIRST, _SLOT_FLAG, _SLOT_SECOND = 0, 1, 2


@dataclass(frozen=True, eq=False)
class ChoiceTable:
    """Per-node choices; ``NONE`` marks a missing choice.

    ``second[u]`` may equal ``first[u]``: the node chose twice (c_u = 2) but
    |C_u| = 1.
    """

    heuristic: str
    alpha: float
    seed: int
    first: np.ndarray
    second: np.ndarray
    epochs: np.ndarray

    @property
    def n(self) -> int:
        return self.first.size

    @property
    def choice_count(self) -> np.ndarray:
        return (self.first != NONE).astype(np.int64) + (self.second != NONE)

    def chosen(self, u: int) -> set[int]:
        return {int(x) for x in (self.first[u], self.second[u]) if x != NONE}

    @property
    def chosen_size(self) -> np.ndarray:
        """|C_u| for every node."""
        size = (self.first != NONE).astype(np.int64)
        size += (self.second != NONE) & (self.second != self.first)
        return size

    def row_equal(self, other: "ChoiceTable") -> np.ndarray:
        return (self.first == other.first) & (self.second == other.second)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def _row_starts(counts: np.ndarray) -> np.ndarray:
    return np.cumsum(counts) - counts


def _pick_uniform(g: Graph, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    deg = g.indptr[rows + 1] - g.indptr[rows]
    k = np.minimum((u * deg).astype(np.int64), deg - 1)
    return g.indices[g.indptr[rows] + k]


def _pick_max_degree(g: Graph, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniform among the neighbors of highest degree."""
    deg_g = g.degrees
    counts = deg_g[rows]
    slots = expand(g.indptr, rows)
    nd = deg_g[g.indices[slots]]
    starts = _row_starts(counts)
    row_of = np.repeat(np.arange(rows.size), counts)
    top = np.maximum.reduceat(nd, starts)
    tie = nd == top[row_of]
    ties = np.add.reduceat(tie.astype(np.int64), starts)
    want = np.minimum((u * ties).astype(np.int64), ties - 1)
    seen = np.cumsum(tie)
    before = seen[starts] - tie[starts]
    rank = seen - 1 - np.repeat(before, counts)
    hit = tie & (rank == want[row_of])
    return g.indices[slots[hit]]


def _pick_by_degree(g: Graph, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Neighbor drawn with probability proportional to its degree."""
    deg_g = g.degrees
    counts = deg_g[rows]
    slots = expand(g.indptr, rows)
    cw = np.cumsum(deg_g[g.indices[slots]])
    starts = _row_starts(counts)
    ends = starts + counts
    base = np.where(starts > 0, cw[starts - 1], 0)
    target = base + u * (cw[ends - 1] - base)
    pos = np.searchsorted(cw, target, side="right")
    pos = np.clip(pos, starts, ends - 1)
    return g.indices[slots[pos]]


_FIRST = {UNIFORM: _pick_uniform, DEGREE: _pick_max_degree}
_SECOND = {UNIFORM: _pick_uniform, DEGREE: _pick_by_degree}


def _choose_rows(g, heuristic, alpha, seed, rows, epochs):
    """First and second choices for ``rows`` (all of degree >= 1)."""
    u1 = keyed_uniform(seed, rows, epochs, _SLOT_FIRST)
    flag = keyed_uniform(seed, rows, epochs, _SLOT_FLAG) < alpha
    u2 = keyed_uniform(seed, rows, epochs, _SLOT_SECOND)
    first = _FIRST[heuristic](g, rows, u1)
    second = np.full(rows.size, NONE, dtype=np.int64)
    if flag.any():
        second[flag] = _SECOND[heuristic](g, rows[flag], u2[flag])
    return first, second


def _fill(g: Graph, heuristic: str, alpha: float, seed: int, rows: np.ndarray,
          epochs: np.ndarray, first: np.ndarray, second: np.ndarray) -> None:
    first[rows] = NONE
    second[rows] = NONE
    rows = rows[g.degrees[rows] > 0]
    if rows.size:
        f, s = _choose_rows(g, heuristic, alpha, seed, rows, epochs[rows])
        first[rows] = f
        second[rows] = s


def make_choices(g: Graph, heuristic: str, alpha: float, seed: int) -> ChoiceTable:
    """Every node's choices under ``heuristic`` ("uniform" or "degree")."""
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    _check_alpha(alpha)
    first = np.full(g.n, NONE, dtype=np.int64)
    second = np.full(g.n, NONE, dtype=np.int64)
    epochs = np.zeros(g.n, dtype=np.int64)
    _fill(g, heuristic, alpha, seed, np.arange(g.n, dtype=np.int64), epochs, first, second)
    return ChoiceTable(heuristic, float(alpha), int(seed), first, second, epochs)


def _check_consistent(g: Graph, t: ChoiceTable) -> None:
    if t.n != g.n:
        raise GraphError("choice table and graph differ in node count")
    deg = g.degrees
    if np.any((t.first == NONE) != (deg == 0)):
        raise GraphError("a node with neighbors made no choice, or vice versa")
    if np.any((t.second != NONE) & (t.first == NONE)):
        raise GraphError("second choice without a first")
    # row-major keys of a CSR with sorted rows are globally sorted
    keys = np.repeat(np.arange(g.n, dtype=np.int64), deg) * g.n + g.indices
    for col in (t.first, t.second):
        src = np.flatnonzero(col != NONE)
        want = src * g.n + col[src]
        pos = np.minimum(np.searchsorted(keys, want), max(keys.size - 1, 0))
        if want.size and (keys.size == 0 or np.any(keys[pos] != want)):
            raise GraphError("a choice is not a neighbor in G")


def build_subgraph(g: Graph, t: ChoiceTable, *, check: bool = True) -> Graph:
    """D: same nodes as G, edge (u, v) iff v in C_u or u in C_v."""
    if check:
        _check_consistent(g, t)
    parts = []
    for col in (t.first, t.second):
        src = np.flatnonzero(col != NONE)
        parts.append(np.column_stack([src, col[src]]))
    return Graph.from_edges(g.n, np.vstack(parts), check=False)


def affected_rows(g: Graph, heuristic: str, u: int, v: int) -> np.ndarray:
    """Rows that must be redrawn when edge (u, v) appears in or vanishes from G.

    ``g`` may be either the old or the new graph; the union over both is the
    same because u and v are always included.
    """
    if heuristic == UNIFORM:
        return np.array(sorted({u, v}), dtype=np.int64)
    rows = {u, v}
    rows.update(g.neighbors(u).tolist())
    rows.update(g.neighbors(v).tolist())
    return np.array(sorted(rows), dtype=np.int64)


def local_update(g: Graph, t: ChoiceTable, edge: tuple[int, int], op: str) -> tuple[Graph, ChoiceTable]:
    """Apply an edge addition/removal to G and redraw only the affected rows.

    Returns the updated graph and choice table; untouched rows are copied
    verbatim.
    """
    u, v = edge
    if op == "add":
        g_new = g.with_edge(u, v)
    elif op == "remove":
        g_new = g.without_edge(u, v)
    else:
        raise ValueError(f"op must be 'add' or 'remove', got {op!r}")
    bigger = g_new if op == "add" else g
    rows = affected_rows(bigger, t.heuristic, u, v)
    first, second, epochs = t.first.copy(), t.second.copy(), t.epochs.copy()
    epochs[rows] += 1
    _fill(g_new, t.heuristic, t.alpha, t.seed, rows, epochs, first, second)
    return g_new, replace(t, first=first, second=second, epochs=epochs)
