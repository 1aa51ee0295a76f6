import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dissem.analytics import pi_c, pi_r
from dissem.graph import Graph, GraphError
from dissem.heuristics import (
    DEGREE, NONE, UNIFORM, ChoiceTable, affected_rows, build_subgraph, local_update, make_choices,
)
from helpers import complete, graphs, path, star


def _copies(g, k):
    """k disjoint copies of g, so one make_choices call gives k independent samples."""
    e = g.edges()
    shift = (np.arange(k, dtype=np.int64) * g.n)[:, None, None]
    return Graph.from_edges(g.n * k, (e[None] + shift).reshape(-1, 2), check=False)


@pytest.mark.parametrize("h", [UNIFORM, DEGREE])
def test_star_leaves_choose_center_and_d_equals_g(h):
    g = star(3)
    t = make_choices(g, h, 0.7, 4)
    for leaf in (1, 2, 3):
        assert t.chosen(leaf) == {0}
    d = build_subgraph(g, t)
    assert np.array_equal(d.indices, g.indices)


def test_alpha_range():
    for a in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            make_choices(star(2), UNIFORM, a, 0)
    with pytest.raises(ValueError):
        make_choices(star(2), "random", 0.5, 0)


def test_triangle_alpha_one_repeat_probability():
    k = 100_000
    t = make_choices(_copies(complete(3), k), UNIFORM, 1.0, 8)
    single = np.mean(t.chosen_size == 1)
    expect = float(pi_r(2, 1.0)[0])
    assert expect == 0.5
    sd = math.sqrt(0.25 / (3 * k))
    assert abs(single - expect) < 4 * sd


def test_path_degree_based_first_choice_ties():
    g = path(3)
    k = 40_000
    t = make_choices(_copies(g, k), DEGREE, 0.3, 2)
    first = t.first.reshape(k, 3) - (np.arange(k) * 3)[:, None]
    assert np.all(first[:, 0] == 1) and np.all(first[:, 2] == 1)
    frac = np.mean(first[:, 1] == 0)
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / k)


def test_degree_based_first_choice_is_max_degree():
    # node 0 neighbors: 1 (deg 3), 2 (deg 1), 3 (deg 2)
    g = Graph.from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (3, 4)])
    for s in range(50):
        assert make_choices(g, DEGREE, 1.0, s).first[0] == 1


def test_degree_based_second_choice_proportional_to_degree():
    g = Graph.from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (3, 4)])
    k = 60_000
    t = make_choices(_copies(g, k), DEGREE, 1.0, 13)
    second = t.second[:: g.n] - np.arange(k) * g.n
    freq = np.bincount(second, minlength=4)[1:4] / k
    want = np.array([3, 1, 2]) / 6
    assert np.all(np.abs(freq - want) < 4 * np.sqrt(want * (1 - want) / k))


@pytest.mark.parametrize("a,alpha", [(1, 0.5), (2, 0.25), (4, 0.5), (7, 1.0)])
def test_uniform_choice_size_matches_pi_r(a, alpha):
    k = 100_000
    t = make_choices(_copies(star(a), k), UNIFORM, alpha, a)
    centre = t.chosen_size[:: a + 1]
    p1 = float(pi_r(a, alpha)[0])
    assert p1 == pytest.approx(1 - alpha + alpha / a)
    sd = math.sqrt(p1 * (1 - p1) / k) or 1e-12
    assert abs(np.mean(centre == 1) - p1) <= 3 * sd + 1e-12


@pytest.mark.parametrize("b,alpha", [(1, 0.5), (2, 0.5), (3, 0.25), (5, 1.0)])
def test_uniform_choices_excluding_fixed_neighbor_match_pi_c(b, alpha):
    # v is the centre of a b-star; u is leaf 1
    k = 100_000
    t = make_choices(_copies(star(b), k), UNIFORM, alpha, 31 + b)
    base = np.arange(k) * (b + 1)
    f, s = t.first[base] - base, t.second[base] - base
    s = np.where(t.second[base] == NONE, -1, s)
    others = np.where(f != 1, 1, 0) + np.where((s != -1) & (s != 1) & (s != f), 1, 0)
    freq = np.bincount(others, minlength=3) / k
    want = np.array([float(x) for x in pi_c(b, alpha)])
    assert want.sum() == pytest.approx(1.0, abs=1e-15)
    sd = np.sqrt(want * (1 - want) / k)
    assert np.all(np.abs(freq - want) <= 3 * sd + 1e-12)


def _triangle_expected_edges(alpha):
    # P(v not in C_u) for degree 2: single choice of the other node, or two choices both elsewhere
    miss = (1 - alpha) * Fraction(1, 2) + alpha * Fraction(1, 4)
    return 3 * (1 - miss**2)


def test_triangle_expected_edges():
    assert _triangle_expected_edges(Fraction(0)) == Fraction(9, 4)
    k = 100_000
    for alpha in (1e-9, 0.5):
        d = build_subgraph(*(lambda g: (g, make_choices(g, UNIFORM, alpha, 5)))(_copies(complete(3), k)))
        per = d.edge_count / k
        want = float(_triangle_expected_edges(Fraction(alpha)))
        assert abs(per - want) < 4 * 0.75 / math.sqrt(k)


def test_triangle_successor_choices_give_triangle():
    g = complete(3)
    t = ChoiceTable(UNIFORM, 0.5, 0, np.array([1, 2, 0]), np.full(3, NONE), np.zeros(3, dtype=np.int64))
    assert build_subgraph(g, t).edge_count == 3


def test_inconsistent_table_rejected():
    g = path(3)
    ok = make_choices(g, UNIFORM, 0.5, 0)
    bad = ChoiceTable(UNIFORM, 0.5, 0, np.array([2, 0, 1]), ok.second, ok.epochs)
    with pytest.raises(GraphError):
        build_subgraph(g, bad)
    with pytest.raises(GraphError):
        build_subgraph(path(4), ok)


@given(graphs(), st.sampled_from([UNIFORM, DEGREE]), st.floats(0.01, 1.0), st.integers(0, 2**40))
def test_choice_invariants(g, h, alpha, seed):
    t = make_choices(g, h, alpha, seed)
    deg = g.degrees
    assert np.array_equal(t.choice_count == 0, deg == 0)
    size, count = t.chosen_size, t.choice_count
    has = deg > 0
    assert np.all((1 <= size[has]) & (size[has] <= count[has]) & (count[has] <= 2))
    for u in range(g.n):
        for v in t.chosen(u):
            assert g.has_edge(u, v)
    d = build_subgraph(g, t)
    assert d.n == g.n
    assert all(g.has_edge(u, v) for u, v in d.edges().tolist())
    want = {tuple(sorted((u, v))) for u in range(g.n) for v in t.chosen(u)}
    assert {tuple(e) for e in d.edges().tolist()} == want
    assert np.all(d.degrees[has] >= 1)
    again = make_choices(g, h, alpha, seed)
    assert np.all(t.row_equal(again))


def _pick_edge(g, data, present):
    if present:
        e = g.edges()
        if e.shape[0] == 0:
            return None
        return tuple(e[data.draw(st.integers(0, e.shape[0] - 1))].tolist())
    missing = [(u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v)]
    if not missing:
        return None
    return missing[data.draw(st.integers(0, len(missing) - 1))]


@given(graphs(max_n=10), st.sampled_from([UNIFORM, DEGREE]), st.sampled_from(["add", "remove"]), st.data())
def test_local_update_touches_only_affected_rows(g, h, op, data):
    edge = _pick_edge(g, data, op == "remove")
    if edge is None:
        return
    t = make_choices(g, h, 0.6, 99)
    g2, t2 = local_update(g, t, edge, op)
    u, v = edge
    bigger = g2 if op == "add" else g
    rows = set(affected_rows(bigger, h, u, v).tolist())
    want = {u, v} if h == UNIFORM else {u, v, *bigger.neighbors(u).tolist(), *bigger.neighbors(v).tolist()}
    assert rows == want
    untouched = np.setdiff1d(np.arange(g.n), list(rows))
    same = t.row_equal(t2)
    assert np.all(same[untouched])
    assert np.all(t2.epochs[untouched] == t.epochs[untouched])
    assert np.all(t2.epochs[list(rows)] == t.epochs[list(rows)] + 1)
    # the new table is valid for the new graph
    build_subgraph(g2, t2)


def test_local_update_removing_last_edge_clears_choices():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    t = make_choices(g, UNIFORM, 1.0, 0)
    g2, t2 = local_update(g, t, (1, 2), "remove")
    assert t2.choice_count[2] == 0 and t2.chosen(2) == set()
    with pytest.raises(ValueError):
        local_update(g, t, (0, 1), "flip")
    with pytest.raises(GraphError):
        local_update(g, t, (0, 2), "remove")


def test_local_update_rows_match_fresh_draws_in_distribution():
    # redrawn rows follow the same law as a from-scratch table on the new graph
    g = star(4)
    k = 8_000
    hits = 0
    for s in range(k):
        t = make_choices(g, UNIFORM, 1.0, s)
        _, t2 = local_update(g, t, (1, 2), "add")
        hits += 2 in t2.chosen(1)
    # leaf 1 now has neighbors {0, 2}: P(2 chosen) = 1 - 1/4
    assert abs(hits / k - 0.75) < 4 * math.sqrt(0.75 * 0.25 / k)
