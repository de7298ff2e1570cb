import json
import random

import pytest
from hypothesis import given, strategies as st

from localsim.ball import ball
from localsim.graph import Graph, branching_tree, cycle, path, random_bounded_degree
from localsim.problems import (build_table, builtin, check, check_solution, edge_grabbing, independent_set, load_table,
                               mis, orientation_to_labels, proper_coloring, sinkless_orientation, table_spec)

from conftest import brute_mis_sets


def test_coloring_examples():
    assert check_solution(proper_coloring(2), cycle(4), [1, 2, 1, 2]).valid
    rep = check_solution(proper_coloring(2), path(2), [1, 1])
    assert not rep.valid and rep.nodes() == [0, 1]
    assert bool(rep) is False


def test_label_outside_alphabet():
    with pytest.raises(ValueError):
        check_solution(proper_coloring(2), path(2), [1, 3])
    with pytest.raises(ValueError):
        check_solution(proper_coloring(2), path(2), [1])


def test_mis_examples():
    g = path(3)
    assert check_solution(mis(), g, [1, 0, 1]).valid
    assert len(check_solution(mis(), g, [0, 0, 0]).violations) == 3


def test_mis_cycle5_example_by_enumeration():
    # {0, 2} on a 5-cycle: 1 and 3 touch 2, 4 touches 0, so the set is maximal
    labels = [1, 0, 1, 0, 0]
    assert {0, 2} in brute_mis_sets(5, cycle(5).edges())
    assert check_solution(mis(), cycle(5), labels).valid
    assert check_solution(mis(), cycle(5), labels, use_balls=True).valid
    assert not check_solution(mis(), cycle(5), [1, 0, 0, 0, 0]).valid


def test_independent_set_ignores_maximality():
    assert check_solution(independent_set(), path(3), [0, 0, 0]).valid
    assert not check_solution(independent_set(), path(3), [1, 1, 0]).valid


def _toward_root(g):
    parent = {0: None}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.adj[u]:
                if v not in parent:
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    heads = {}
    for u, v in g.edges():
        a, b = min(u, v), max(u, v)
        heads[(a, b)] = parent.get(a) == b  # a -> b iff b is a's parent
    return heads


def test_sinkless_tree_toward_root():
    g = branching_tree(3, layers=3)
    labels = orientation_to_labels(g, _toward_root(g))
    for use_balls in (False, True):
        rep = check_solution(sinkless_orientation(), g, labels, use_balls=use_balls)
        assert rep.nodes() == [0]


def test_sinkless_rejects_malformed_labels():
    g = path(3)
    with pytest.raises(ValueError):
        check_solution(sinkless_orientation(), g, [(1,), (0, 1), (1,)])


def test_edge_grabbing_single_edge():
    g = Graph.from_edges(2, [(0, 1)], colors={(0, 1): 1})
    for use_balls in (False, True):
        assert len(check_solution(edge_grabbing(), g, [1, 1], use_balls=use_balls).violations) == 2
        assert check_solution(edge_grabbing(), g, [1, None], use_balls=use_balls).nodes() == [1]


def _proper_edge_colored(n, edges):
    cols = {}
    for u, v in edges:
        used = {c for (a, b), c in cols.items() if {a, b} & {u, v}}
        cols[(u, v)] = min(c for c in range(1, 2 * n + 2) if c not in used)
    return Graph.from_edges(n, edges, colors=cols)


@given(st.integers(0, 10 ** 6), st.integers(1, 25))
def test_fast_path_agrees_with_ball_predicate(seed, n):
    rng = random.Random(seed)
    g = random_bounded_degree(n, 3, seed=seed)
    cols = [rng.randint(1, 3) for _ in range(n)]
    sel = [rng.randint(0, 1) for _ in range(n)]
    for spec, lab in ((proper_coloring(3), cols), (mis(), sel)):
        assert check_solution(spec, g, lab).violations.__len__() == \
            len(check_solution(spec, g, lab, use_balls=True).violations)
        assert check_solution(spec, g, lab).nodes() == check_solution(spec, g, lab, use_balls=True).nodes()
    heads = {e: rng.random() < 0.5 for e in g.edges()}
    lab = orientation_to_labels(g, {(min(e), max(e)): h for e, h in heads.items()})
    a = check_solution(sinkless_orientation(), g, lab)
    b = check_solution(sinkless_orientation(), g, lab, use_balls=True)
    assert a.nodes() == b.nodes() and a.valid == (not a.violations)
    eg = _proper_edge_colored(n, g.edges())
    grab = [rng.choice([None] + [eg.color_of(u, v) for v in eg.adj[u]]) for u in range(n)]
    assert check_solution(edge_grabbing(), eg, grab).nodes() == \
        check_solution(edge_grabbing(), eg, grab, use_balls=True).nodes()


@given(st.integers(0, 10 ** 6), st.integers(1, 9))
def test_mis_checker_matches_brute_force(seed, n):
    g = random_bounded_degree(n, 3, seed=seed)
    sets = brute_mis_sets(n, g.edges())
    for mask in range(1 << n):
        lab = [(mask >> u) & 1 for u in range(n)]
        assert check_solution(mis(), g, lab).valid == ({u for u in range(n) if lab[u]} in sets)


def test_builtin_and_errors():
    assert builtin("proper_coloring", k=3).name == "proper_coloring(3)"
    assert builtin("mis").r == 1
    with pytest.raises(ValueError):
        builtin("nope")


def test_network_decomposition_problem():
    g = path(4)
    spec = builtin("network_decomposition", c=1, d=3)
    assert check(spec, g, [(1, 0)] * 4).valid
    assert not check(builtin("network_decomposition", c=1, d=3), g, [(1, 0), (1, 1), (1, 1), (1, 1)]).valid


def test_table_spec_round_trip(tmp_path):
    graphs = [path(k) for k in range(1, 5)] + [cycle(3), cycle(4)]
    table = build_table(proper_coloring(2), graphs, [1, 2])
    f = tmp_path / "tab.json"
    f.write_text(json.dumps(table))
    spec = load_table(str(f))
    g = path(5)
    assert check_solution(spec, g, [1, 2, 1, 2, 1]).valid
    assert check_solution(spec, g, [1, 1, 2, 1, 2]).nodes() == [0, 1]
    with pytest.raises(ValueError):
        table_spec({"r": 3, "S_out": [1], "allowed_balls": []})


def test_allowed_is_isomorphism_invariant():
    # the table problem only sees canonical codes, so relabeled graphs get identical verdicts
    plain = [Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)]) for k in range(1, 5)]
    spec = table_spec(build_table(mis(), plain, [0, 1]))
    g = plain[3]
    h = Graph.from_edges(4, [(3, 1), (1, 0), (0, 2)])  # same path, order 3-1-0-2
    lab_g = [1, 0, 0, 1]
    lab_h = [0, 0, 1, 1]  # positions of g relabeled: g0->h3, g1->h1, g2->h0, g3->h2
    assert check_solution(spec, g, lab_g).valid == check_solution(spec, h, lab_h).valid
    assert ball(g, 0, 1, lab_g).canonical_code() == ball(h, 3, 1, lab_h).canonical_code()
