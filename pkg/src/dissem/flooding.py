"""Flooding of a single datum over D, with optional transmission failures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import UNREACHED, ComponentLabeling, Graph, bfs_distances, expand


@dataclass(frozen=True, eq=False)
class DisseminationOutcome:
    originator: int
    dist: np.ndarray  # hop count at first receipt, UNREACHED otherwise
    messages: int

    @property
    def reached(self) -> np.ndarray:
        return np.flatnonzero(self.dist != UNREACHED)

    @property
    def reached_count(self) -> int:
        return int(np.count_nonzero(self.dist != UNREACHED))

    @property
    def distance_sum(self) -> int:
        return int(self.dist[self.dist != UNREACHED].sum())


def disseminate(d: Graph, originator: int, gamma: float = 1.0,
                rng: np.random.Generator | None = None) -> DisseminationOutcome:
    """Flood from ``originator`` over D.

    Every node that holds the datum sends one copy over each of its D-edges
    exactly once, including back to whoever it came from. A copy arrives with
    probability ``gamma``; lost copies are still counted as messages and are
    never resent.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    d._check_node(originator)
    if gamma < 1.0 and rng is None:
        raise ValueError("a random generator is required when gamma < 1")
    dist = np.full(d.n, UNREACHED, dtype=np.int64)
    dist[originator] = 0
    frontier = np.array([originator], dtype=np.int64)
    messages = 0
    level = 0
    while frontier.size:
        level += 1
        slots = expand(d.indptr, frontier)
        messages += slots.size
        if gamma < 1.0:
            slots = slots[rng.random(slots.size) < gamma]
        targets = d.indices[slots]
        targets = np.unique(targets[dist[targets] == UNREACHED])
        dist[targets] = level
        frontier = targets
    return DisseminationOutcome(int(originator), dist, int(messages))


@dataclass(frozen=True)
class MetricSample:
    pn: float
    pm: float
    pt: float
    zd: float


def mean_distance(dist: np.ndarray) -> float:
    """Mean hop count over reached nodes other than the source (0 if none)."""
    hops = dist[dist > 0]
    return float(hops.mean()) if hops.size else 0.0


def d_degree_in_giant(d: Graph, labels_g: ComponentLabeling) -> float:
    """Mean D-degree over the members of G's largest component."""
    members = labels_g.giant_nodes()
    return float(d.degrees[members].mean())


def measure(g: Graph, d: Graph, outcome: DisseminationOutcome, labels_g: ComponentLabeling,
            g_mean_distance: float | None = None, zd: float | None = None) -> MetricSample:
    """Per-run ratios against G's largest component.

    ``g_mean_distance`` (mean G-distance from the originator) and ``zd`` can be
    passed in when already known; they do not depend on the run.
    """
    size = labels_g.giant_size
    if size <= 1:
        raise ValueError("largest component of G has at most one node")
    if labels_g.component_id[outcome.originator] != labels_g.giant_id:
        raise ValueError("originator is outside the largest component of G")
    if g_mean_distance is None:
        g_mean_distance = mean_distance(bfs_distances(g, outcome.originator))
    if zd is None:
        zd = d_degree_in_giant(d, labels_g)
    return MetricSample(
        pn=outcome.reached_count / size,
        pm=outcome.messages / (2.0 * (size - 1)),
        pt=mean_distance(outcome.dist) / g_mean_distance,
        zd=zd,
    )
