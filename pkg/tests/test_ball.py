import random

import pytest
from hypothesis import given, strategies as st

from localsim.ball import ball, canonical_code
from localsim.errors import LocalityViolation
from localsim.graph import Graph, cycle, path, random_bounded_degree, random_regular

from conftest import all_pairs_distances


def test_radius_zero_and_one_on_cycle():
    g = cycle(5)
    b0 = ball(g, 0, 0)
    assert len(b0) == 1 and b0.nodes == (0,)
    b1 = ball(g, 0, 1)
    assert set(b1.nodes) == {4, 0, 1}
    assert len(b1.edges()) == 2


def test_ball_out_of_range():
    with pytest.raises(IndexError):
        ball(cycle(5), 7, 1)


def test_ball_size_bound_on_regular():
    g = random_regular(50, 3, seed=1)
    dist = all_pairs_distances(g.n, g.edges())
    for u in range(g.n):
        b = ball(g, u, 2)
        assert len(b) <= 10
        assert set(b.nodes) == {v for v, d in dist[u].items() if d <= 2}
        assert all(b.dist[i] == dist[u][b.nodes[i]] for i in range(len(b)))


@given(st.integers(0, 10 ** 6), st.integers(1, 20), st.integers(0, 3))
def test_balls_nested(seed, n, r):
    g = random_bounded_degree(n, 3, seed=seed)
    for u in range(n):
        assert set(ball(g, u, r).nodes) <= set(ball(g, u, r + 1).nodes)


def test_boundary_neighbors_are_hidden():
    b = ball(path(5), 2, 1)
    assert b.neighbors(0)
    j = b.neighbors(0)[0]
    with pytest.raises(LocalityViolation):
        b.neighbors(j)


def test_sub_ball_matches_direct_ball():
    g = random_bounded_degree(30, 3, seed=4)
    labels = list(range(100, 130))
    big = ball(g, 0, 4, labels)
    for i in range(len(big)):
        if big.dist[i] <= 2:
            sb = big.sub_ball(i, 2)
            direct = ball(g, big.nodes[i], 2, labels)
            assert sb == direct
    far = next(i for i in range(len(big)) if big.dist[i] == 4) if 4 in big.dist else None
    if far is not None:
        with pytest.raises(LocalityViolation):
            big.sub_ball(far, 1)


def _permuted(g, perm):
    edges = [(perm[u], perm[v]) for u, v in g.edges()]
    arcs = None
    if g.oriented:
        arcs = [(perm[a], perm[b]) if g.orientation[(a, b)] else (perm[b], perm[a]) for a, b in g.edges()]
    if arcs is not None:
        return Graph.from_edges(g.n, arcs, arcs=True)
    return Graph.from_edges(g.n, edges)


@given(st.integers(0, 10 ** 6), st.integers(1, 12), st.integers(0, 3), st.booleans())
def test_canonical_code_invariant_under_relabeling(seed, n, r, oriented_cycle):
    rng = random.Random(seed)
    g = cycle(max(n, 3)) if oriented_cycle else random_bounded_degree(n, 3, seed=seed)
    perm = list(range(g.n))
    rng.shuffle(perm)
    h = _permuted(g, perm)
    labels = [rng.randrange(3) for _ in range(g.n)]
    hl = [None] * g.n
    for u in range(g.n):
        hl[perm[u]] = labels[u]
    for u in range(g.n):
        assert ball(g, u, r, labels).canonical_code() == ball(h, perm[u], r, hl).canonical_code()


def test_canonical_code_distinguishes():
    g = path(5)
    assert ball(g, 0, 2).canonical_code() != ball(g, 2, 2).canonical_code()
    assert ball(g, 2, 1, [0, 1, 2, 3, 4]).canonical_code() != ball(g, 2, 1, [0, 1, 9, 3, 4]).canonical_code()
    # a 6-cycle and two triangles agree on every local degree but not on structure
    c6 = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
    tt = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert ball(c6, 0, 3).canonical_code() != ball(tt, 0, 3).canonical_code()


def test_orientation_visible_in_code():
    g = cycle(5)
    und = Graph.from_edges(5, g.edges())
    assert ball(g, 0, 2).canonical_code() != ball(und, 0, 2).canonical_code()


def test_canonical_code_function_is_cached():
    b = ball(cycle(6), 0, 2)
    assert b.canonical_code() is b.canonical_code()
    assert canonical_code(b) == b.canonical_code()
