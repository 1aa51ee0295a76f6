"""Small graphs and strategies shared by several test modules."""

import itertools

import numpy as np
from hypothesis import strategies as st

from dissem.graph import Graph, components


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete(n):
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)))


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, k in zip(pairs, keep) if k]
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def connected_graphs(n):
    """All connected graphs on n nodes, one per isomorphism class."""
    pairs = list(itertools.combinations(range(n), 2))
    perms = list(itertools.permutations(range(n)))
    seen, out = set(), []
    for mask in range(1 << len(pairs)):
        edges = [p for k, p in enumerate(pairs) if mask >> k & 1]
        if len(edges) < n - 1:
            continue
        canon = min(
            tuple(sorted(tuple(sorted((pi[u], pi[v]))) for u, v in edges)) for pi in perms
        )
        if canon in seen:
            continue
        seen.add(canon)
        g = Graph.from_edges(n, np.array(edges).reshape(-1, 2))
        if components(g).giant_size == n:
            out.append(g)
    return out


def copies(g, k):
    """k disjoint copies of g; one choice table over it gives k independent samples."""
    e = g.edges()
    shift = (np.arange(k, dtype=np.int64) * g.n)[:, None, None]
    return Graph.from_edges(g.n * k, (e[None] + shift).reshape(-1, 2), check=False)


def raw_choice_outcomes(a, alpha):
    """Every raw outcome of a degree-a node's uniform choices as (picks, probability)."""
    out = [((i,), (1 - alpha) / a) for i in range(a)]
    out += [((i, j), alpha / (a * a)) for i in range(a) for j in range(a)]
    return out


def chosen_set_law(a, alpha):
    """Distribution of the chosen set C_u (as a frozenset of neighbor slots)."""
    law = {}
    for picks, p in raw_choice_outcomes(a, alpha):
        key = frozenset(picks)
        law[key] = law.get(key, 0) + p
    return law


def exact_reached_fraction(g, alpha):
    """E[reached / n] for a uniformly random originator under the uniform rule, by enumeration."""
    n = g.n
    per_node = []
    for u in range(n):
        nb = g.neighbors(u).tolist()
        law = chosen_set_law(len(nb), alpha)
        per_node.append([([(u, nb[i]) for i in s], p) for s, p in law.items()])
    total = 0.0
    for combo in itertools.product(*per_node):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        prob = 1.0
        for edges, p in combo:
            prob *= p
            for x, y in edges:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
        sizes = {}
        for x in range(n):
            r = find(x)
            sizes[r] = sizes.get(r, 0) + 1
        total += prob * sum(s * s for s in sizes.values())
    return total / (n * n)


def oracle_corpus():
    """Connected graphs with 2..5 nodes plus a few sparse 6-node shapes."""
    out = []
    for n in range(2, 6):
        out.extend(connected_graphs(n))
    out += [path(6), cycle(6), star(5),
            Graph.from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)])]
    return out
