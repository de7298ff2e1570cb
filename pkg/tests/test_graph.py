import random

import pytest
from hypothesis import given, strategies as st

from localsim.errors import InvalidParameters, TapeExhausted
from localsim.graph import (Graph, IdAssignment, RandomTape, assign_ids, branching_tree, branching_tree_size, cycle,
                            generate, path, power_graph, random_bounded_degree, random_regular, read_bits)

from conftest import all_pairs_distances


def test_graph_rejects_self_loops_and_multi_edges():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 5)])


def test_improper_edge_coloring_rejected():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 1), (1, 2)], colors={(0, 1): 1, (1, 2): 1})


def test_symmetry_and_max_degree():
    g = random_bounded_degree(60, 4, seed=3)
    for u in range(g.n):
        for v in g.adj[u]:
            assert u in g.adj[v]
    assert g.max_degree == max(len(a) for a in g.adj)


def test_cycle_needs_three_nodes():
    with pytest.raises(InvalidParameters):
        cycle(1)
    with pytest.raises(InvalidParameters):
        cycle(2)


def test_cycle_orientation():
    g = cycle(5)
    assert g.oriented
    assert [g.successor(u) for u in range(5)] == [1, 2, 3, 4, 0]
    assert g.predecessor(0) == 4


def test_branching_tree_size():
    g = branching_tree(3, layers=2)
    assert g.n == 10
    for delta, layers in [(3, 1), (3, 3), (4, 2), (10, 3)]:
        closed = 1 + delta * ((delta - 1) ** layers - 1) // (delta - 2)
        assert branching_tree_size(delta, layers) == closed
        assert branching_tree(delta, layers=layers).n == closed


def test_branching_tree_edge_coloring_is_proper():
    g = branching_tree(4, layers=3)
    for u in range(g.n):
        cols = [g.color_of(u, v) for v in g.adj[u]]
        assert len(cols) == len(set(cols))
        assert all(1 <= c <= 4 for c in cols)
    assert g.m == g.n - 1


def test_branching_tree_truncated_by_n():
    g = branching_tree(10, n=1000)
    assert g.n == 1000
    assert g.max_degree == 10


def test_random_regular_degree_audit():
    g = random_regular(100, 4, seed=7)
    assert all(g.degree(u) == 4 for u in range(g.n))


def test_random_regular_parity():
    with pytest.raises(InvalidParameters):
        random_regular(5, 3, seed=0)


def test_generators_are_reproducible():
    for fam, p in [("random_regular", {"n": 40, "delta": 3}), ("random_bounded_degree", {"n": 40, "delta": 5})]:
        a = generate(fam, seed=11, **p)
        b = generate(fam, seed=11, **p)
        assert a.edges() == b.edges()
    assert generate("random_regular", seed=1, n=40, delta=3).edges() != \
        generate("random_regular", seed=2, n=40, delta=3).edges()


def test_power_graph_examples():
    g = cycle(7)
    assert power_graph(g, 1).edges() == g.edges()
    assert all(power_graph(cycle(6), 2).degree(u) == 4 for u in range(6))
    assert [power_graph(path(5), 2).degree(u) for u in range(5)] == [2, 3, 4, 3, 2]


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(2, 25), st.integers(1, 3), st.integers(1, 3))
def test_power_graph_matches_distances(seed, n, a, b):
    g = random_bounded_degree(n, 3, seed=seed)
    dist = all_pairs_distances(n, g.edges())
    ga = power_graph(g, a)
    expect = {(u, v) for u in range(n) for v in range(u + 1, n) if v in dist[u] and dist[u][v] <= a}
    assert set(ga.edges()) == expect
    gab = power_graph(ga, b)
    expect2 = {(u, v) for u in range(n) for v in range(u + 1, n) if v in dist[u] and dist[u][v] <= a * b}
    assert set(gab.edges()) == expect2


def test_text_round_trip():
    for g in [cycle(9), path(4), branching_tree(3, layers=2), random_regular(20, 3, seed=1),
              Graph.from_edges(3, [])]:
        text = g.to_text()
        h = Graph.from_text(text)
        assert h.to_text() == text
        assert h.edges() == g.edges()
        assert h.orientation == g.orientation
        assert h.edge_color == g.edge_color


def test_assign_ids_examples():
    g1 = Graph.from_edges(1, [])
    assert assign_ids(g1, exponent=2, seed=4).ids == (1,)
    p = path(4)
    ids = assign_ids(p, seed=3, mode="increasing")
    assert ids[0] < ids[1] < ids[2] < ids[3]
    g = Graph.from_edges(10, [])
    a = assign_ids(g, exponent=3, seed=5)
    assert len(set(a.ids)) == 10 and all(1 <= x < 1000 for x in a.ids)


def test_id_assignment_validation():
    with pytest.raises(InvalidParameters):
        IdAssignment((1, 1), 5)
    with pytest.raises(InvalidParameters):
        IdAssignment((0, 2), 5)
    with pytest.raises(InvalidParameters):
        IdAssignment((1, 5), 5)


def test_tape_bits_and_regeneration():
    t1 = RandomTape.generate(5, 16, seed=9)
    t2 = RandomTape.generate(5, 16, seed=9)
    assert t1 == t2
    for u in range(5):
        s = t1.bitstring(u)
        assert len(s) == 16
        for start in range(0, 16, 3):
            cnt = min(3, 16 - start)
            assert t1.bits(u, start, cnt) == int(s[start:start + cnt], 2)
    with pytest.raises(TapeExhausted):
        t1.bits(0, 15, 2)
    with pytest.raises(TapeExhausted):
        read_bits(0, 4, 4, 1)


def test_tape_reader_sequential():
    t = RandomTape.generate(1, 8, seed=2)
    r = t.reader(0)
    got = "".join(str(r.bit()) for _ in range(8))
    assert got == t.bitstring(0)
    with pytest.raises(TapeExhausted):
        r.bit()


def test_bfs_limit():
    g = path(6)
    assert g.bfs(0, limit=2) == {0: 0, 1: 1, 2: 2}


def test_induced_subgraph():
    g = cycle(6)
    h, keep = g.induced([0, 1, 2, 4])
    assert keep == [0, 1, 2, 4]
    assert h.edges() == [(0, 1), (1, 2)]
