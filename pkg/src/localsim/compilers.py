"""Model translations: SLOCAL -> LOCAL compilation, sequential composition, derandomization by
conditional expectations, slowdown, and the constant-size speedup."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .ball import Ball, ball
from .decomposition import NetworkDecomposition, _weak_diameter, ball_carving_sequential, validate
from .engine import LocalFunctionAlgorithm, RunResult, SequentialLocalAlgorithm, run_function_mode, run_sequential
from .errors import (EnumerationTooLarge, ExpectationTooLarge, IncompatibleIds, InvalidParameters,
                     SpeedupRefused)
from .graph import Graph, IdAssignment, id_range, power_graph
from .lll import Event, LLLInstance
from .problems import LocalProblemSpec, check_solution
from .symmetry import RED, _arc_maps, distance_coloring


def _relabel(b: Ball, labels) -> Ball:
    return Ball(b.radius, b.dist, labels, b.degree, b.ports, b.arcs, b.ecolor, b.nodes)


def _id_list(g: Graph, ids):
    if ids is None:
        return list(range(1, g.n + 1))
    if isinstance(ids, IdAssignment):
        return list(ids.ids)
    return list(ids)


class _Instrumented(SequentialLocalAlgorithm):
    """Wraps a sequential algorithm and asserts it never reads a pair written by a node of the
    same class in a different group (same color, other cluster)."""

    def __init__(self, seq, color, group):
        self.seq = seq
        self.color = color
        self.group = group
        self.name = getattr(seq, "name", "sequential")
        self.reads = 0

    def locality(self, n):
        return self.seq.locality(n)

    def apply(self, n, b):
        u = b.nodes[0]
        for i, lab in enumerate(b.labels):
            if i and lab[1] is not None:
                v = b.nodes[i]
                self.reads += 1
                assert not (self.color[v] == self.color[u] and self.group[v] != self.group[u]), \
                    f"node {u} read the pair of {v}, processed in parallel"
        return self.seq.apply(n, b)


class CompiledViaDecomposition:
    """SLOCAL -> LOCAL through a network decomposition of G^t.

    Colors are handled one after the other; inside a color every cluster's
    leader (minimum id) gathers the cluster plus its t-neighborhood and runs
    the sequential algorithm over the cluster in id order. Clusters of one
    color are more than t apart in G, so they run in parallel without ever
    reading each other's pairs.
    """

    def __init__(self, seq: SequentialLocalAlgorithm, decomposer: Callable | None = None):
        self.seq = seq
        self.decomposer = decomposer or (lambda g, ids: ball_carving_sequential(g, ids))
        self.name = f"compiled_nd:{getattr(seq, 'name', 'sequential')}"

    def run(self, g: Graph, ids=None, labels=None, n: int | None = None) -> RunResult:
        nn = g.n if n is None else n
        idl = _id_list(g, ids)
        t = self.seq.locality(nn)
        pg = power_graph(g, max(t, 1))
        nd: NetworkDecomposition = self.decomposer(pg, idl)
        rep = validate(pg, nd)
        if not rep.valid:
            raise InvalidParameters(f"decomposition of G^{t} is invalid: {rep.violations[:3]}")
        clusters = nd.clusters()
        leader = {k: min(mem, key=lambda v: idl[v]) for k, mem in clusters.items()}
        keyed = sorted(clusters, key=lambda k: (nd.color[clusters[k][0]], idl[leader[k]]))
        order = []
        per_color: dict = {}
        for k in keyed:
            mem = sorted(clusters[k], key=lambda v: idl[v])
            order.extend(mem)
            c = nd.color[mem[0]]
            diam = _weak_diameter(g, mem)
            per_color[c] = max(per_color.get(c, 0), diam + t)
        inst = _Instrumented(self.seq, nd.color, nd.cluster)
        res = run_sequential(inst, g, order, labels=labels, n=nn)
        dec_rounds = int(nd.stats.get("rounds", 0))
        sim_rounds = int(sum(per_color.values()))
        res.algorithm = self.name
        res.rounds = dec_rounds + sim_rounds
        res.locality_used = res.rounds
        res.extra.update({"decomposition_rounds": dec_rounds, "simulation_rounds": sim_rounds,
                          "colors": nd.c, "cluster_diameter": nd.d, "instrumented_reads": inst.reads})
        del res.extra["info"]
        return res


class CompiledViaColoring:
    """SLOCAL -> LOCAL through a proper coloring of G^t: color classes in turn, each class in parallel."""

    def __init__(self, seq: SequentialLocalAlgorithm, t: int | None = None):
        self.seq = seq
        self.t = t
        self.name = f"compiled_col:{getattr(seq, 'name', 'sequential')}"

    def run(self, g: Graph, ids=None, labels=None, n: int | None = None) -> RunResult:
        nn = g.n if n is None else n
        t = self.seq.locality(nn) if self.t is None else self.t
        idl = _id_list(g, ids)
        col = distance_coloring(g, max(t, 1), IdAssignment(tuple(idl), max(idl) + 1 if idl else 1))
        colors = col.labels
        order = sorted(range(g.n), key=lambda v: (colors[v], idl[v]))
        inst = _Instrumented(self.seq, colors, list(range(g.n)))
        res = run_sequential(inst, g, order, labels=labels, n=nn)
        k = col.extra["range"]
        res.algorithm = self.name
        res.rounds = col.rounds + k * t
        res.locality_used = res.rounds
        res.extra.update({"coloring_rounds": col.rounds, "simulation_rounds": k * t, "classes": k,
                          "used_classes": len(set(colors)), "instrumented_reads": inst.reads})
        del res.extra["info"]
        return res


def slocal_to_local_via_decomposition(seq, decomposer=None) -> CompiledViaDecomposition:
    return CompiledViaDecomposition(seq, decomposer)


def slocal_to_local_via_coloring(seq, t: int | None = None) -> CompiledViaColoring:
    return CompiledViaColoring(seq, t)


# sequential composition

class Composed(SequentialLocalAlgorithm):
    """Runs a1 then a2 in one sequential pass.

    At u: simulate a1 on every not yet simulated node within t2 (in local BFS
    order), keeping those results in u's stored info, then run a2 on the
    a1-labeled t2-ball. a1 results of a node may sit at any processed node up
    to t2 away from it, hence locality t1 + 2*t2.
    """

    def __init__(self, a1: SequentialLocalAlgorithm, a2: SequentialLocalAlgorithm):
        self.a1 = a1
        self.a2 = a2
        self.name = f"compose({getattr(a1, 'name', 'a1')},{getattr(a2, 'name', 'a2')})"

    def locality(self, n):
        return self.a1.locality(n) + 2 * self.a2.locality(n)

    def apply(self, n, b: Ball):
        t1, t2 = self.a1.locality(n), self.a2.locality(n)
        known = {}
        for lab in b.labels:
            if lab[1] is not None:
                known.update(lab[1][1]["a1"])
        inputs = [lab[0] for lab in b.labels]
        new = {}
        for i in range(len(b)):
            if b.dist[i] > t2 or b.nodes[i] in known:
                continue
            sub = b.sub_ball(i, t1)
            sb = _relabel(sub, [(inputs[_local(b, h)], known.get(h)) for h in sub.nodes])
            s1, i1 = self.a1.apply(n, sb)
            known[b.nodes[i]] = (s1, i1)
            new[b.nodes[i]] = (s1, i1)
        inner = b.sub_ball(0, t2)
        lab2 = []
        for h in inner.nodes:
            own = b.labels[_local(b, h)][1]
            lab2.append((known[h][0], (own[0], own[1]["a2"]) if own is not None else None))
        s2, i2 = self.a2.apply(n, _relabel(inner, lab2))
        return s2, {"a1": new, "a2": i2, "s1": known[b.nodes[0]][0]}


def _local(b: Ball, h):
    idx = getattr(b, "_hidx", None)
    if idx is None:
        idx = {x: i for i, x in enumerate(b.nodes)}
        b._hidx = idx
    return idx[h]


def compose_sequential(a1, a2) -> Composed:
    return Composed(a1, a2)


def composition_witness(res: RunResult):
    """(sigma1, sigma2, a1 labels) from a run of a Composed algorithm."""
    sigma2 = list(res.extra["witness_order"])
    info = res.extra["info"]
    sigma1 = []
    s1 = [None] * len(info)
    for u in sigma2:
        for h, (s, _) in info[u]["a1"].items():
            sigma1.append(h)
            s1[h] = s
    return sigma1, sigma2, s1


# failure oracles and derandomization

class FailureOracle:
    """P(problem violated at v | fixed blocks), exact, by enumerating the free blocks of B(v, r+t).

    Ball labels seen by the randomized algorithm are its B-bit blocks. Only
    node-labeled problems (no prepare step) are supported.
    """

    def __init__(self, alg: LocalFunctionAlgorithm, problem: LocalProblemSpec, B: int, cap: int = 20):
        self.alg = alg
        self.problem = problem
        self.B = B
        self.cap = cap
        self.calls = 0

    def radius(self, n):
        return self.problem.r + self.alg.radius(n)

    def probability(self, n: int, b: Ball, v: int, fixed: dict) -> Fraction:
        self.calls += 1
        R, t, r = self.radius(n), self.alg.radius(n), self.problem.r
        sub = b.sub_ball(v, R)
        free = [i for i, h in enumerate(sub.nodes) if h not in fixed]
        if self.B * len(free) > self.cap:
            raise EnumerationTooLarge(f"{self.B * len(free)} free bits in the ball exceed {self.cap}")
        hidx = {h: i for i, h in enumerate(sub.nodes)}
        close = [i for i in range(len(sub)) if sub.dist[i] <= r]
        views = [(i, sub.sub_ball(i, t)) for i in close]
        views = [(i, sb, [hidx[h] for h in sb.nodes]) for i, sb in views]
        pb = sub.sub_ball(0, r)
        pmap = [hidx[h] for h in pb.nodes]
        base = [fixed.get(h, 0) for h in sub.nodes]
        bad = 0
        for combo in itertools.product(range(1 << self.B), repeat=len(free)):
            lab = list(base)
            for i, x in zip(free, combo):
                lab[i] = x
            out = {}
            for i, sb, m in views:
                out[i] = self.alg.evaluate(n, _relabel(sb, [lab[j] for j in m]))
            if self.problem.allowed(_relabel(pb, [out.get(j) for j in pmap])) is not None:
                bad += 1
        return Fraction(bad, 1 << (self.B * len(free)))


def _no_isolated_one_count(bits: list) -> int:
    """Number of cyclic 0/1 completions of ``bits`` (None = free) with no 1 between two 0s."""
    n = len(bits)
    total = 0
    opts = [(0, 1) if x is None else (x,) for x in bits]
    for b0 in opts[0]:
        for b1 in opts[1]:
            # state (b_{i-1}, b_i) -> count
            st = {(b0, b1): 1}
            for i in range(2, n):
                nxt = {}
                for (p, c), k in st.items():
                    for x in opts[i]:
                        if c == 1 and p == 0 and x == 0:
                            continue
                        nxt[(c, x)] = nxt.get((c, x), 0) + k
                st = nxt
            for (p, c), k in st.items():
                if c == 1 and p == 0 and b0 == 0:
                    continue
                if b0 == 1 and c == 0 and b1 == 0:
                    continue
                total += k
    return total


class CycleFailureOracle:
    """Closed-form oracle for the whole-view cycle 3-coloring with B attempts.

    The output is proper iff some attempt produces a red node; otherwise
    every node outputs 1 and every node fails. So P(X(v)=1 | fixed) is the
    product over attempts of P(no red in that attempt), counted by a
    transfer-matrix pass around the cycle. Memoized on the fixed blocks.
    """

    def __init__(self, B: int):
        self.B = B
        self.memo: dict = {}
        self.calls = 0

    def radius(self, n):
        return 1 + (n + 1) // 2

    def probability(self, n: int, b: Ball, v: int, fixed: dict) -> Fraction:
        self.calls += 1
        pred, _ = _arc_maps(b)
        seq = [v]
        while True:
            x = pred.get(seq[-1])
            if x is None:
                raise InvalidParameters("ball does not contain the whole cycle")
            if x == v:
                break
            seq.append(x)
        hs = [b.nodes[i] for i in seq]
        key = (frozenset(hs), frozenset((h, fixed[h]) for h in hs if h in fixed))
        if key in self.memo:
            return self.memo[key]
        free = sum(1 for h in hs if h not in fixed)
        p = Fraction(1)
        for a in range(self.B):
            bits = [((fixed[h] >> (self.B - 1 - a)) & 1) if h in fixed else None for h in hs]
            p *= Fraction(_no_isolated_one_count(bits), 1 << free)
        self.memo[key] = p
        return p


class Derandomized(SequentialLocalAlgorithm):
    """Fix each node's whole B-bit block to the lexicographically smallest value minimizing the
    conditional expectation of the number of failures. Locality 2(r + t)."""

    def __init__(self, alg: LocalFunctionAlgorithm, problem: LocalProblemSpec, B: int, oracle=None):
        self.alg = alg
        self.problem = problem
        self.B = B
        self.oracle = oracle or FailureOracle(alg, problem, B)
        self.name = f"derandomized:{getattr(alg, 'name', 'alg')}"

    def reach(self, n):
        return self.problem.r + self.alg.radius(n)

    def locality(self, n):
        return 2 * self.reach(n)

    def apply(self, n, b: Ball):
        R = self.reach(n)
        fixed = {b.nodes[i]: lab[1][0] for i, lab in enumerate(b.labels) if lab[1] is not None}
        targets = [i for i in range(len(b)) if b.dist[i] <= R]
        totals = []
        for x in range(1 << self.B):
            fixed[b.nodes[0]] = x
            totals.append(sum((self.oracle.probability(n, b, i, fixed) for i in targets), Fraction(0)))
        best = min(range(1 << self.B), key=lambda x: (totals[x], x))
        mean = sum(totals, Fraction(0)) / (1 << self.B)
        return best, totals[best] - mean

    def expectation(self, g: Graph, n: int | None = None) -> Fraction:
        nn = g.n if n is None else n
        R = self.reach(nn)
        return sum((self.oracle.probability(nn, ball(g, v, R), 0, {}) for v in range(g.n)), Fraction(0))

    def run(self, g: Graph, order, n: int | None = None) -> RunResult:
        nn = g.n if n is None else n
        e0 = self.expectation(g, nn)
        if e0 >= 1:
            raise ExpectationTooLarge(f"initial expected number of failures is {e0} >= 1")
        res = run_sequential(self, g, order, n=nn)
        blocks = res.labels
        trace = [e0]
        for u in res.extra["witness_order"]:
            d = res.extra["info"][u]
            assert d <= 0, "conditional expectation increased"
            trace.append(trace[-1] + d)
        out = run_function_mode(self.alg, g, labels=blocks, n=nn)
        rep = check_solution(self.problem, g, out.labels)
        final = trace[-1]
        assert final.denominator == 1 and final == len(rep.violations), \
            "final expectation disagrees with the direct failure count"
        assert final < 1
        return RunResult(out.labels, res.rounds, res.rounds, self.name, g.n, valid=rep.valid,
                         extra={"blocks": blocks, "trace": trace, "witness_order": res.extra["witness_order"],
                                "initial_expectation": e0})


def derandomize(rand_alg, problem, B: int, oracle=None) -> Derandomized:
    return Derandomized(rand_alg, problem, B, oracle)


# slowdown

class Slowed(LocalFunctionAlgorithm):
    """alg'_n = alg_{f(n)}: the wrapped algorithm is told the graph has f(n) nodes."""

    def __init__(self, alg, f: Callable[[int], int], exponent: int = 3):
        self.alg = alg
        self.f = f
        self.exponent = exponent
        self.name = f"slowed:{getattr(alg, 'name', 'alg')}"
        self.cacheable = getattr(alg, "cacheable", False)

    def _fn(self, n):
        m = self.f(n)
        if m < n:
            raise InvalidParameters("f(n) must be at least n")
        return m

    def radius(self, n):
        return self.alg.radius(self._fn(n))

    def evaluate(self, n, b):
        return self.alg.evaluate(self._fn(n), b)

    def run(self, g: Graph, ids=None, labels=None, n: int | None = None) -> RunResult:
        nn = g.n if n is None else n
        m = self._fn(nn)
        idl = _id_list(g, ids)
        if idl and max(idl) >= id_range(m, self.exponent):
            raise IncompatibleIds(f"ids must lie below f(n)^C = {id_range(m, self.exponent)}")
        if hasattr(self.alg, "run"):
            res = self.alg.run(g, ids, labels=labels, n=m)
        else:
            res = run_function_mode(self.alg, g, labels=idl if labels is None else labels, n=m)
        res.algorithm = self.name
        res.extra["advertised_n"] = m
        return res


def slowdown(alg, f: Callable[[int], int], exponent: int = 3) -> Slowed:
    return Slowed(alg, f, exponent)


# speedup

@dataclass(frozen=True)
class SpeedupParams:
    n0: int
    r: int
    t0: int
    rho: int
    delta: int
    exponent: int = 3

    @property
    def ball_bound(self) -> int:
        return sum(self.delta ** i for i in range(self.t0 + self.r + 1))


def speedup_params(alg: LocalFunctionAlgorithm, n0: int, r: int, delta: int, exponent: int = 3) -> SpeedupParams:
    """Checks 1 + Δ + ... + Δ^(t(n0)+r) <= n0 and refuses otherwise."""
    t0 = alg.radius(n0)
    p = SpeedupParams(n0, r, t0, 2 * (t0 + r), delta, exponent)
    if p.ball_bound > n0:
        raise SpeedupRefused(f"sum of delta^i up to t0+r = {p.ball_bound} exceeds n0 = {n0}")
    return p


class Constantized:
    """Fake ids from a coloring of G^(2(t0+r)), then alg at advertised size n0."""

    def __init__(self, alg: LocalFunctionAlgorithm, params: SpeedupParams):
        self.alg = alg
        self.params = params
        self.name = f"constantized:{getattr(alg, 'name', 'alg')}"

    def local_part(self) -> LocalFunctionAlgorithm:
        """The size-oblivious second stage: radius t0 and alg_{n0}, whatever n is claimed."""
        from .engine import FunctionAlgorithm
        p = self.params
        return FunctionAlgorithm(p.t0, lambda n, b: self.alg.evaluate(p.n0, b), f"{self.name}:local", False)

    def fake_ids(self, g: Graph, ids=None) -> RunResult:
        p = self.params
        if g.max_degree > p.delta:
            raise InvalidParameters(f"max degree {g.max_degree} exceeds the configured {p.delta}")
        idl = _id_list(g, ids)
        col = distance_coloring(g, p.rho, IdAssignment(tuple(idl), max(idl) + 1 if idl else 1))
        if col.extra["range"] >= id_range(p.n0, p.exponent):
            raise SpeedupRefused(f"fake id range {col.extra['range']} does not fit below n0^C")
        return col

    def run(self, g: Graph, ids=None, labels=None, n: int | None = None) -> RunResult:
        col = self.fake_ids(g, ids)
        out = run_function_mode(self.local_part(), g, labels=col.labels)
        return RunResult(out.labels, col.rounds + self.params.t0, col.rounds + self.params.t0, self.name, g.n,
                         extra={"fake_ids": col.labels, "coloring_rounds": col.rounds, "t0": self.params.t0,
                                "n0": self.params.n0})


def speedup_constantize(alg, params: SpeedupParams) -> Constantized:
    if params.ball_bound > params.n0:
        raise SpeedupRefused("the ball-size condition fails for these parameters")
    return Constantized(alg, params)


def audit_failures(g: Graph, fake_ids, report, params: SpeedupParams) -> list:
    """For every violating node: its (t0+r)-ball has <= n0 nodes and pairwise distinct fake ids."""
    out = []
    for v in report.nodes():
        b = ball(g, v, params.t0 + params.r)
        ids = [fake_ids[h] for h in b.nodes]
        uniq = len(set(ids)) == len(ids)
        assert len(b) <= params.n0 and uniq, f"violation at {v} is not certified"
        out.append((v, len(b), uniq))
    return out


def reduce_id_range(g: Graph, ids, rho: int, exponent: int = 3) -> list:
    """Replace ids from a huge range by ids below n^C that stay distinct within distance rho."""
    idl = _id_list(g, ids)
    col = distance_coloring(g, max(rho, 1), IdAssignment(tuple(idl), max(idl) + 1))
    if col.extra["range"] >= id_range(g.n, exponent):
        raise SpeedupRefused("reduced range does not fit below n^C")
    return col.labels


# randomized speedup as an LLL instance

class SimulationEvent(Event):
    """alg_{n0} fails at u, as a predicate over the blocks of B(u, t0+r) (variables = node ids)."""

    def __init__(self, g, u, alg, problem, n0, B, t0):
        R = t0 + problem.r
        self.b = ball(g, u, R)
        super().__init__(sorted(self.b.nodes), None, f"fail@{u}")
        self.alg, self.problem, self.n0, self.B = alg, problem, n0, B
        hidx = {h: i for i, h in enumerate(self.b.nodes)}
        self.pos = [hidx[h] for h in self.vars]
        close = [i for i in range(len(self.b)) if self.b.dist[i] <= problem.r]
        self.views = []
        for i in close:
            sb = self.b.sub_ball(i, t0)
            self.views.append((i, sb, [hidx[h] for h in sb.nodes]))
        self.pb = self.b.sub_ball(0, problem.r)
        self.pmap = [hidx[h] for h in self.pb.nodes]

    def violated(self, values):
        lab = [0] * len(self.b)
        for p, x in zip(self.pos, values):
            lab[p] = x
        out = {i: self.alg.evaluate(self.n0, _relabel(sb, [lab[j] for j in m])) for i, sb, m in self.views}
        return self.problem.allowed(_relabel(self.pb, [out.get(j) for j in self.pmap])) is not None


def randomized_speedup_to_lll(alg: LocalFunctionAlgorithm, params: SpeedupParams, g: Graph,
                              problem: LocalProblemSpec, B: int) -> LLLInstance:
    if params.ball_bound > params.n0:
        raise SpeedupRefused("the ball-size condition fails for these parameters")
    evs = [SimulationEvent(g, u, alg, problem, params.n0, B, params.t0) for u in range(g.n)]
    for e in evs:
        assert len(e.vars) <= params.ball_bound <= params.n0
    return LLLInstance([B] * g.n, evs)


def replay_tape(alg: LocalFunctionAlgorithm, g: Graph, blocks: Sequence[int], n0: int) -> list:
    return run_function_mode(alg, g, labels=list(blocks), n=n0).labels
