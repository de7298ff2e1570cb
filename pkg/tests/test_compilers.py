import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from localsim.ball import ball
from localsim.compilers import (CycleFailureOracle, FailureOracle, _no_isolated_one_count, audit_failures,
                                compose_sequential, composition_witness, derandomize, randomized_speedup_to_lll,
                                reduce_id_range, replay_tape, slocal_to_local_via_coloring,
                                slocal_to_local_via_decomposition, slowdown, speedup_constantize, speedup_params)
from localsim.engine import FunctionAlgorithm, SequentialAlgorithm, random_order, run_sequential
from localsim.errors import (EnumerationTooLarge, ExpectationTooLarge, IncompatibleIds, InvalidParameters,
                             SpeedupRefused)
from localsim.graph import Graph, assign_ids, cycle, random_bounded_degree, random_regular
from localsim.lll import moser_tardos
from localsim.problems import check_solution, independent_set, mis, proper_coloring
from localsim.symmetry import ColeVishkinCycle, Cycle3ColorLocal, greedy_coloring_slocal, greedy_mis_slocal

from conftest import all_pairs_distances


def _replays(seq, g, res):
    return run_sequential(seq, g, res.extra["witness_order"]).labels == res.labels


def test_compiled_edgeless():
    g = Graph.from_edges(6, [])
    for comp in (slocal_to_local_via_decomposition(greedy_mis_slocal()),
                 slocal_to_local_via_coloring(greedy_mis_slocal())):
        assert comp.run(g).labels == [1] * 6


def test_compiled_mis_cycle128_replays():
    g = cycle(128)
    res = slocal_to_local_via_decomposition(greedy_mis_slocal()).run(g, assign_ids(g, seed=1))
    assert check_solution(mis(), g, res.labels).valid
    assert _replays(greedy_mis_slocal(), g, res)
    assert res.extra["instrumented_reads"] > 0
    assert res.rounds == res.extra["decomposition_rounds"] + res.extra["simulation_rounds"]


def test_compiled_coloring_via_coloring():
    g = random_regular(200, 3, seed=1)
    res = slocal_to_local_via_coloring(greedy_coloring_slocal()).run(g, assign_ids(g, seed=1))
    assert check_solution(proper_coloring(4), g, res.labels).valid
    assert _replays(greedy_coloring_slocal(), g, res)


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.integers(1, 60), st.booleans())
def test_compiled_replay_random_graphs(seed, n, via_nd):
    g = random_bounded_degree(n, 4, seed=seed)
    ids = assign_ids(g, seed=seed)
    for seq, spec in ((greedy_mis_slocal, mis()), (greedy_coloring_slocal, proper_coloring(g.max_degree + 1))):
        c = slocal_to_local_via_decomposition(seq()) if via_nd else slocal_to_local_via_coloring(seq())
        res = c.run(g, ids)
        assert check_solution(spec, g, res.labels).valid
        assert _replays(seq(), g, res)


def test_compiled_distance_two_sequential():
    # a locality-2 rule: take the smallest color unused within distance 2
    def apply(n, b):
        used = {lab[1][0] for i, lab in enumerate(b.labels) if i and lab[1] is not None}
        c = 1
        while c in used:
            c += 1
        return c, None
    seq = SequentialAlgorithm(2, apply, "d2color")
    g = random_regular(60, 3, seed=4)
    res = slocal_to_local_via_decomposition(seq).run(g, assign_ids(g, seed=4))
    dist = all_pairs_distances(g.n, g.edges())
    for u in range(g.n):
        for v, d in dist[u].items():
            if 0 < d <= 2:
                assert res.labels[u] != res.labels[v]
    assert run_sequential(seq, g, res.extra["witness_order"]).labels == res.labels


def test_bad_decomposer_rejected():
    def one_cluster(g, ids):
        from localsim.decomposition import NetworkDecomposition
        return NetworkDecomposition([1] * g.n, [0] * g.n, 1, 0)
    with pytest.raises(InvalidParameters):
        slocal_to_local_via_decomposition(greedy_mis_slocal(), one_cluster).run(cycle(8))


def _local_min():
    def apply(n, b):
        me = b.labels[0][0]
        return (1 if all(b.labels[j][0] > me for j in b.neighbors(0)) else 0), None
    return SequentialAlgorithm(1, apply, "local_min")


def test_composition_independent_set_and_replay():
    rng = random.Random(0)
    comp = compose_sequential(greedy_coloring_slocal(), _local_min())
    assert comp.locality(10) == 3
    for trial in range(50):
        g = random_bounded_degree(rng.randint(1, 30), 3, seed=trial)
        order = random_order(g.n, trial)
        res = run_sequential(comp, g, order)
        assert check_solution(independent_set(), g, res.labels).valid
        s1_order, s2_order, s1 = composition_witness(res)
        assert sorted(s1_order) == list(range(g.n))
        assert run_sequential(greedy_coloring_slocal(), g, s1_order).labels == s1
        assert check_solution(proper_coloring(g.max_degree + 1), g, s1).valid
        assert run_sequential(_local_min(), g, s2_order, labels=s1).labels == res.labels


def test_composition_ignoring_first_stage():
    ignore = SequentialAlgorithm(1, lambda n, b: greedy_mis_slocal().apply(n, b), "mis")
    g = random_regular(30, 3, seed=2)
    order = random_order(30, 5)
    comp = run_sequential(compose_sequential(greedy_coloring_slocal(), ignore), g, order)
    assert comp.labels == run_sequential(greedy_mis_slocal(), g, order).labels


def _brute_no_isolated(bits):
    n, tot = len(bits), 0
    free = [i for i, x in enumerate(bits) if x is None]
    for m in range(1 << len(free)):
        b = list(bits)
        for j, i in enumerate(free):
            b[i] = (m >> j) & 1
        if not any(b[i] == 1 and b[i - 1] == 0 and b[(i + 1) % n] == 0 for i in range(n)):
            tot += 1
    return tot


@given(st.lists(st.sampled_from([0, 1, None]), min_size=3, max_size=12))
def test_transfer_matrix_count(bits):
    assert _no_isolated_one_count(bits) == _brute_no_isolated(bits)


def test_failure_oracles_agree():
    g = cycle(7)
    alg = Cycle3ColorLocal(attempts=2)
    enum = FailureOracle(alg, proper_coloring(3), 2)
    dp = CycleFailureOracle(2)
    rng = random.Random(1)
    R = enum.radius(7)
    assert R == dp.radius(7)
    for size in (0, 3, 5, 7):
        fixed = {h: rng.randrange(4) for h in rng.sample(range(7), size)}
        for v in range(7):
            b = ball(g, v, R)
            p1 = enum.probability(7, b, 0, fixed)
            p2 = dp.probability(7, b, 0, fixed)
            assert p1 == p2
            assert (p1 * (1 << (2 * sum(1 for h in range(7) if h not in fixed)))).denominator == 1


def test_enumeration_cap():
    orc = FailureOracle(Cycle3ColorLocal(attempts=2), proper_coloring(3), 2, cap=10)
    g = cycle(9)
    with pytest.raises(EnumerationTooLarge):
        orc.probability(9, ball(g, 0, orc.radius(9)), 0, {})


def test_derandomize_never_failing():
    alg = FunctionAlgorithm(0, lambda n, b: 0, "zero")
    d = derandomize(alg, independent_set(), 1)
    g = cycle(6)
    res = d.run(g, list(range(6)))
    assert res.valid and res.extra["initial_expectation"] == 0
    assert res.extra["blocks"] == [0] * 6


def test_derandomize_cycle12():
    g = cycle(12)
    d = derandomize(Cycle3ColorLocal(attempts=2), proper_coloring(3), 2, oracle=CycleFailureOracle(2))
    assert d.locality(12) == 2 * (1 + 6)
    res = d.run(g, random_order(12, 0))
    tr = res.extra["trace"]
    assert all(a >= b for a, b in zip(tr, tr[1:]))
    assert tr[-1] == 0 and res.valid
    assert check_solution(proper_coloring(3), g, res.labels).valid


def test_derandomize_refuses_large_expectation():
    d = derandomize(Cycle3ColorLocal(attempts=1), proper_coloring(3), 1, oracle=CycleFailureOracle(1))
    with pytest.raises(ExpectationTooLarge):
        d.run(cycle(8), list(range(8)))
    assert d.expectation(cycle(8)) == Fraction(8 * _brute_no_isolated([None] * 8), 256)


def test_slowdown():
    g = cycle(32)
    ids = assign_ids(g, seed=1)
    comp = slocal_to_local_via_decomposition(greedy_mis_slocal())
    base = comp.run(g, ids)
    same = slowdown(comp, lambda n: n).run(g, ids)
    assert same.labels == base.labels
    slow = slowdown(comp, lambda n: n * n).run(g, ids)
    assert check_solution(mis(), g, slow.labels).valid and slow.extra["advertised_n"] == 1024
    cv = ColeVishkinCycle(3)
    s = slowdown(cv, lambda n: n * n)
    assert s.radius(32) == cv.radius(1024)
    assert check_solution(proper_coloring(3), g, s.run(g, ids).labels).valid
    with pytest.raises(IncompatibleIds):
        slowdown(cv, lambda n: n).run(g, list(range(40000, 40032)))
    with pytest.raises(InvalidParameters):
        s2 = slowdown(cv, lambda n: n // 2)
        s2.radius(32)


def test_speedup_constant_output():
    const = FunctionAlgorithm(0, lambda n, b: 1, "one")
    p = speedup_params(const, 128, 1, 2)
    res = speedup_constantize(const, p).run(cycle(40), assign_ids(cycle(40), seed=0))
    assert res.labels == [1] * 40


def test_speedup_refusal():
    cv = ColeVishkinCycle(3)
    with pytest.raises(SpeedupRefused):
        speedup_params(cv, 256, 1, 2)
    p = speedup_params(cv, 512, 1, 2)
    assert p.t0 == cv.radius(512) and p.ball_bound <= 512 and p.rho == 2 * (p.t0 + 1)


def test_speedup_cv_small_cycles():
    cv = ColeVishkinCycle(3)
    c = speedup_constantize(cv, speedup_params(cv, 512, 1, 2))
    for n in (3, 10, 64, 200):
        g = cycle(n)
        res = c.run(g, assign_ids(g, seed=n))
        assert check_solution(proper_coloring(3), g, res.labels).valid


def test_failure_audit_with_broken_algorithm():
    # "color = fake id mod 3 + 1" is wrong; every failure it shows must be certified
    broken = FunctionAlgorithm(1, lambda n, b: b.label % 3 + 1, "mod3")
    p = speedup_params(broken, 8, 1, 2)
    c = speedup_constantize(broken, p)
    g = cycle(50)
    res = c.run(g, assign_ids(g, seed=3))
    rep = check_solution(proper_coloring(3), g, res.labels)
    assert not rep.valid
    audit = audit_failures(g, res.extra["fake_ids"], rep, p)
    assert len(audit) == len(rep.nodes())
    assert all(size <= p.n0 and uniq for _, size, uniq in audit)


def test_reduce_id_range():
    g = cycle(30)
    big = [10 ** 12 + 7 * i for i in range(30)]
    new = reduce_id_range(g, big, 3)
    dist = all_pairs_distances(30, g.edges())
    assert max(new) < 30 ** 3
    for u in range(30):
        for v, d in dist[u].items():
            if 0 < d <= 3:
                assert new[u] != new[v]


def test_never_failing_lll_instance():
    alg = FunctionAlgorithm(0, lambda n, b: 0, "zero")
    p = speedup_params(alg, 4, 1, 2)
    inst = randomized_speedup_to_lll(alg, p, cycle(10), independent_set(), 1)
    assert all(inst.probability(i, {}) == 0 for i in range(len(inst.events)))


def test_randomized_speedup_end_to_end():
    alg = Cycle3ColorLocal(attempts=1, window=5)
    p = speedup_params(alg, 128, 1, 2)
    g = cycle(64)
    inst = randomized_speedup_to_lll(alg, p, g, proper_coloring(3), 1)
    assert inst.delta <= p.ball_bound - 1 + p.ball_bound
    assert all(len(e.vars) <= p.ball_bound <= p.n0 for e in inst.events)
    mt = moser_tardos(inst, seed=0, max_resamples=100000)
    blocks = [mt.assignment[u] for u in range(g.n)]
    labels = replay_tape(alg, g, blocks, p.n0)
    assert check_solution(proper_coloring(3), g, labels).valid
