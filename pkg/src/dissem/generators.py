"""Random graph construction: G(n, p) and the urn (configuration) model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degrees import POISSON, POWERLAW, DegreeModel, ModelError
from .graph import Graph
from .rng import stream

MAX_PARITY_ATTEMPTS = 10**6


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    n: int
    model: DegreeModel
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be at least 1")
        if self.model.kind == POISSON and self.model.param > self.n - 1:
            raise ModelError(f"z={self.model.param} exceeds n-1={self.n - 1}")


def generate(spec: GenSpec, rng: np.random.Generator | None = None) -> Graph:
    rng = stream(spec.seed) if rng is None else rng
    if spec.model.kind == POISSON:
        return gen_erdos_renyi(spec, rng)
    if spec.model.kind == POWERLAW:
        return gen_power_law(spec, rng)
    raise ModelError(f"no generator for {spec.model.kind!r}")


def gen_erdos_renyi(spec: GenSpec, rng: np.random.Generator | None = None) -> Graph:
    """Each of the n(n-1)/2 pairs is an edge with probability z/(n-1).

    Pairs are visited in row-major order ``(0,1), (0,2), ..., (n-2,n-1)`` and
    skipped over with geometric gaps, so the cost is O(n + m).
    """
    if spec.model.kind != POISSON:
        raise ModelError("Erdos-Renyi generation needs a Poisson model")
    rng = stream(spec.seed) if rng is None else rng
    n = spec.n
    if n < 2:
        return Graph.empty(n)
    p = spec.model.param / (n - 1)
    total = n * (n - 1) // 2
    if p <= 0:
        return Graph.empty(n)
    if p >= 1:
        picks = np.arange(total, dtype=np.int64)
    else:
        chunk = max(1024, int(1.2 * total * p) + 64)
        pos, parts = -1, []
        while True:
            # gaps saturate at int64 max for tiny p; anything past the end is equivalent
            gaps = np.minimum(rng.geometric(p, size=chunk), total + 1)
            idx = pos + np.cumsum(gaps)
            parts.append(idx[idx < total])
            if idx[-1] >= total:
                break
            pos = int(idx[-1])
        picks = np.concatenate(parts)
    # row u owns pair indices [start[u], start[u] + n - 1 - u)
    u_ids = np.arange(n, dtype=np.int64)
    start = u_ids * (2 * n - u_ids - 1) // 2
    u = np.searchsorted(start, picks, side="right") - 1
    v = picks - start[u] + u + 1
    return Graph._from_canonical(n, u, v)


def sample_degree_sequence(model: DegreeModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. degrees from ``model`` capped at n-1, redrawn until the sum is even.

    Sampling from the pmf truncated to ``0..n-1`` is the same as redrawing any
    single value above n-1.
    """
    cap = min(model.max_degree, n - 1)
    if cap < 1:
        return np.zeros(n, dtype=np.int64)
    p = model.pmf_array[: cap + 1]
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    for _ in range(MAX_PARITY_ATTEMPTS):
        seq = np.searchsorted(cdf, rng.random(n), side="right")
        np.minimum(seq, cap, out=seq)
        if int(seq.sum()) % 2 == 0:
            return seq.astype(np.int64)
    raise GenerationError("could not draw a degree sequence with even sum")


def pair_stubs(degrees, rng: np.random.Generator) -> np.ndarray:
    """Uniform random pairing of labeled balls; returns the multigraph's edges."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if int(degrees.sum()) % 2:
        raise GenerationError("degree sum must be even")
    balls = np.repeat(np.arange(degrees.size, dtype=np.int64), degrees)
    rng.shuffle(balls)
    return balls.reshape(-1, 2)


def simplify(n: int, multi_edges: np.ndarray) -> Graph:
    """Drop self-loops and collapse parallel edges."""
    e = multi_edges[multi_edges[:, 0] != multi_edges[:, 1]]
    return Graph.from_edges(n, e, check=False)


def graph_from_degree_sequence(degrees, rng: np.random.Generator) -> Graph:
    degrees = np.asarray(degrees, dtype=np.int64)
    return simplify(degrees.size, pair_stubs(degrees, rng))


def gen_power_law(spec: GenSpec, rng: np.random.Generator | None = None) -> Graph:
    if spec.model.kind != POWERLAW:
        raise ModelError("power-law generation needs a power-law model")
    rng = stream(spec.seed) if rng is None else rng
    seq = sample_degree_sequence(spec.model, spec.n, rng)
    return graph_from_degree_sequence(seq, rng)
