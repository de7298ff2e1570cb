"""Constructive Lovász local lemma: instances, criteria, the shattering first phase, residual
solving, Moser-Tardos resampling, and the sinkless-orientation encoding."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import BudgetExhausted, EnumerationTooLarge
from .graph import Graph, RandomTape, read_bits

E_LOW = Fraction(3678794411, 10 ** 10)
E_HIGH = Fraction(3678794412, 10 ** 10)
ENUM_CAP = 24


# partial assignments: var -> (prefix value, number of fixed leading bits)

class Event:
    """Bad event over some variables. ``violated(values)`` gets full values in ``vars`` order."""

    def __init__(self, vars: Sequence[int], violated: Callable | None = None, name: str = ""):
        self.vars = tuple(vars)
        self._violated = violated
        self.name = name

    def violated(self, values) -> bool:
        return bool(self._violated(tuple(values)))

    def probability(self, bits: Sequence[int], partial: dict, cap: int = ENUM_CAP) -> Fraction:
        return enumerate_probability(self, bits, partial, cap)

    def to_json(self, bits):
        total = sum(bits[v] for v in self.vars)
        if total > 20:
            raise EnumerationTooLarge("event too large to list its violating assignments")
        bad = []
        for combo in itertools.product(*[range(1 << bits[v]) for v in self.vars]):
            if self.violated(combo):
                bad.append(_pack(combo, [bits[v] for v in self.vars]))
        return {"vars": list(self.vars), "violating": bad}


def _pack(values, widths) -> int:
    x = 0
    for v, w in zip(values, widths):
        x = (x << w) | v
    return x


def _unpack(x: int, widths) -> tuple:
    out = []
    for w in reversed(widths):
        out.append(x & ((1 << w) - 1))
        x >>= w
    return tuple(reversed(out))


def _choices(var_bits: int, fixed):
    if fixed is None:
        return range(1 << var_bits)
    val, k = fixed
    if k >= var_bits:
        return (val,)
    free = var_bits - k
    base = val << free
    return range(base, base + (1 << free))


def free_bits(ev: Event, bits, partial) -> int:
    tot = 0
    for v in ev.vars:
        f = partial.get(v)
        tot += bits[v] - (f[1] if f is not None else 0)
    return tot


def enumerate_probability(ev: Event, bits, partial: dict, cap: int = ENUM_CAP) -> Fraction:
    """Violating completions / 2^(free bits), by direct enumeration."""
    fb = free_bits(ev, bits, partial)
    if fb > cap:
        raise EnumerationTooLarge(f"{fb} free bits exceed the cap of {cap}")
    bad = 0
    for combo in itertools.product(*[_choices(bits[v], partial.get(v)) for v in ev.vars]):
        if ev.violated(combo):
            bad += 1
    return Fraction(bad, 1 << fb)


class TableEvent(Event):
    """Event given by the list of its violating packed assignments."""

    def __init__(self, vars, violating, widths):
        super().__init__(vars, None, "table")
        self.widths = list(widths)
        self.bad = sorted(set(violating))
        self._bad_set = set(self.bad)

    def violated(self, values):
        return _pack(values, self.widths) in self._bad_set

    def probability(self, bits, partial, cap=ENUM_CAP):
        fb = free_bits(self, bits, partial)
        cnt = 0
        for x in self.bad:
            vals = _unpack(x, self.widths)
            ok = True
            for v, val, w in zip(self.vars, vals, self.widths):
                f = partial.get(v)
                if f is not None and (val >> (w - f[1])) != f[0]:
                    ok = False
                    break
            if ok:
                cnt += 1
        return Fraction(cnt, 1 << fb)

    def to_json(self, bits):
        return {"vars": list(self.vars), "violating": list(self.bad)}


class SinkEvent(Event):
    """All listed 1-bit variables equal their 'into' value."""

    def __init__(self, vars, into, node=None):
        super().__init__(vars, None, "sink")
        self.into = tuple(into)
        self.node = node

    def violated(self, values):
        return tuple(values) == self.into

    def probability(self, bits, partial, cap=ENUM_CAP):
        free = 0
        for v, want in zip(self.vars, self.into):
            f = partial.get(v)
            if f is None or f[1] == 0:
                free += 1
            elif f[0] != want:
                return Fraction(0)
        return Fraction(1, 1 << free)

    def to_json(self, bits):
        return {"vars": list(self.vars), "violating": "builtin:sink", "into": list(self.into)}


class LLLInstance:
    def __init__(self, var_bits: Sequence[int], events: Sequence[Event], C: int = 3):
        self.var_bits = list(var_bits)
        self.events = list(events)
        self.C = C
        self.var_events: list[list[int]] = [[] for _ in self.var_bits]
        for i, e in enumerate(self.events):
            if len(set(e.vars)) != len(e.vars):
                raise ValueError(f"event {i} repeats a variable")
            for v in e.vars:
                self.var_events[v].append(i)
        self._dep = None

    def __repr__(self):
        return f"LLLInstance(vars={len(self.var_bits)}, events={len(self.events)})"

    @property
    def delta_rv(self) -> int:
        return max((len(e.vars) for e in self.events), default=0)

    @property
    def delta_be(self) -> int:
        return max((len(x) for x in self.var_events), default=0)

    def dependency_graph(self) -> Graph:
        if self._dep is None:
            edges = set()
            for evs in self.var_events:
                for a, b in itertools.combinations(sorted(set(evs)), 2):
                    edges.add((a, b))
            self._dep = Graph.from_edges(len(self.events), sorted(edges))
        return self._dep

    @property
    def delta(self) -> int:
        return self.dependency_graph().max_degree

    def probability(self, i: int, partial: dict | None = None) -> Fraction:
        return self.events[i].probability(self.var_bits, partial or {})

    def max_prior(self) -> Fraction:
        return max((self.probability(i) for i in range(len(self.events))), default=Fraction(0))

    def violated(self, i: int, assignment) -> bool:
        e = self.events[i]
        return e.violated([assignment[v] for v in e.vars])

    def violated_events(self, assignment) -> list[int]:
        return [i for i in range(len(self.events)) if self.violated(i, assignment)]

    def to_dict(self) -> dict:
        return {"variables": [{"bits": b} for b in self.var_bits], "C": self.C,
                "events": [e.to_json(self.var_bits) for e in self.events]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "LLLInstance":
        bits = [int(v["bits"]) for v in d["variables"]]
        evs = []
        for e in d["events"]:
            vars_ = [int(x) for x in e["vars"]]
            if e["violating"] == "builtin:sink":
                if any(bits[v] != 1 for v in vars_):
                    raise ValueError("sink events need 1-bit variables")
                evs.append(SinkEvent(vars_, e["into"]))
            else:
                evs.append(TableEvent(vars_, [int(x) for x in e["violating"]], [bits[v] for v in vars_]))
        return cls(bits, evs, int(d.get("C", 3)))


@dataclass
class Criterion:
    holds: bool | None  # None = indeterminate
    value: Fraction
    bound: Fraction
    kind: str

    @property
    def margin(self) -> Fraction:
        return self.bound - self.value


def check_criterion(inst: LLLInstance, kind: str = "tight", C: int | None = None) -> Criterion:
    """tight: p(Δ+1) <= 1/e (bracketed rationally); relaxed: p·Δ^C <= 1 (exact)."""
    p = inst.max_prior()
    D = inst.delta
    if kind == "tight":
        x = p * (D + 1)
        if x <= E_LOW:
            return Criterion(True, x, E_LOW, kind)
        if x > E_HIGH:
            return Criterion(False, x, E_LOW, kind)
        return Criterion(None, x, E_LOW, kind)
    if kind == "relaxed":
        cc = inst.C if C is None else C
        x = p * D ** cc
        return Criterion(x <= 1, x, Fraction(1), f"relaxed({cc})")
    raise ValueError(f"unknown criterion {kind!r}")


# first phase

@dataclass
class ShatterResult:
    partial: dict  # var -> (prefix value, fixed bits)
    frozen: set
    residual_events: list
    components: list  # lists of event indices
    threshold: Fraction
    delta: int
    stats: dict = field(default_factory=dict)

    def fixed_value(self, v, bits):
        f = self.partial.get(v)
        return f[0] if f is not None and f[1] == bits[v] else None

    @property
    def component_sizes(self):
        return [len(c) for c in self.components]


def fg_first_phase(inst: LLLInstance, order: Sequence[int] | None = None, tape: RandomTape | None = None,
                   seed: int = 0, delta: int | None = None) -> ShatterResult:
    """Sample variables bit by bit; an event whose conditional probability crosses 1/(6Δ)
    freezes every variable it touches that is not yet fully sampled.

    Before a variable's first bit, events already above the threshold freeze it
    straight away (possible only with large priors).
    """
    bits = inst.var_bits
    D = max(1, inst.delta if delta is None else delta)
    theta = Fraction(1, 6 * D)
    nv = len(bits)
    if tape is None:
        tape = RandomTape.generate(nv, max(bits, default=0), seed)
    order = list(range(nv)) if order is None else list(order)
    partial: dict = {}
    frozen: set = set()
    doubling_checks = 0

    def freeze(ev_idx):
        for y in inst.events[ev_idx].vars:
            f = partial.get(y)
            if f is None or f[1] < bits[y]:
                frozen.add(y)

    for x in order:
        if x in frozen:
            continue
        evs = inst.var_events[x]
        for e in evs:
            if inst.probability(e, partial) > theta:
                freeze(e)
        if x in frozen:
            continue
        cur = {e: inst.probability(e, partial) for e in evs}
        for j in range(bits[x]):
            b = read_bits(tape[x], tape.budget, j, 1)
            val = (partial[x][0] << 1 | b) if x in partial else b
            partial[x] = (val, j + 1)
            crossing = []
            for e in evs:
                p = inst.probability(e, partial)
                assert p <= 2 * cur[e], "conditional probability more than doubled"
                doubling_checks += 1
                cur[e] = p
                if p > theta:
                    crossing.append(e)
            if crossing:
                for e in crossing:
                    freeze(e)
                break
    residual = [i for i in range(len(inst.events)) if inst.probability(i, partial) > 0]
    bound = Fraction(1, 3 * D)
    for i in residual:
        p = inst.probability(i, partial)
        # an event that started above the threshold was frozen untouched and keeps its prior
        assert p <= bound or p == inst.probability(i), "residual event above 1/(3Δ)"
    comps = _components(inst, residual, partial)
    return ShatterResult(partial, frozen, residual, comps, theta, D,
                         {"doubling_checks": doubling_checks, "frozen": len(frozen)})


def _unfinished(inst, v, partial):
    f = partial.get(v)
    return f is None or f[1] < inst.var_bits[v]


def _components(inst: LLLInstance, residual, partial):
    res = set(residual)
    seen = set()
    comps = []
    for s in residual:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            e = stack.pop()
            comp.append(e)
            for v in inst.events[e].vars:
                if not _unfinished(inst, v, partial):
                    continue
                for e2 in inst.var_events[v]:
                    if e2 in res and e2 not in seen:
                        seen.add(e2)
                        stack.append(e2)
        comps.append(sorted(comp))
    return comps


def solve_residual(inst: LLLInstance, component: Sequence[int], partial: dict,
                   cap: int = 1 << 24, seed: int = 0) -> dict:
    """Lexicographically first completion of the component's unfinished variables violating none
    of its events (depth-first, bits most significant first, 0 before 1)."""
    comp = list(component)
    if not comp:
        return {}
    vars_ = sorted({v for e in comp for v in inst.events[e].vars if _unfinished(inst, v, partial)})
    work = dict(partial)
    steps = [(v, j) for v in vars_ for j in range(work.get(v, (0, 0))[1], inst.var_bits[v])]
    comp_set = set(comp)
    touching = {v: [e for e in inst.var_events[v] if e in comp_set] for v in vars_}
    visited = 0

    def rec(i):
        nonlocal visited
        if i == len(steps):
            return True
        v, j = steps[i]
        for b in (0, 1):
            visited += 1
            if visited > cap:
                raise EnumerationTooLarge("component search over cap")
            old = work.get(v)
            work[v] = ((old[0] << 1 | b) if old is not None and old[1] > 0 else b, j + 1)
            if all(inst.probability(e, work) < 1 for e in touching[v]) and rec(i + 1):
                return True
            if old is None:
                del work[v]
            else:
                work[v] = old
        return False

    try:
        import sys
        lim = sys.getrecursionlimit()
        if len(steps) + 100 > lim:
            sys.setrecursionlimit(len(steps) + 1000)
        found = rec(0)
    except EnumerationTooLarge:
        return _mt_component(inst, comp, partial, seed)
    if not found:
        raise AssertionError("no completion exists for a residual component")
    return {v: work[v][0] for v in vars_}


def _mt_component(inst, comp, partial, seed):
    vars_ = sorted({v for e in comp for v in inst.events[e].vars if _unfinished(inst, v, partial)})
    res = moser_tardos(inst, seed=seed, events=comp, partial=partial, max_resamples=100 * len(comp) + 1000)
    return {v: res.assignment[v] for v in vars_}


def complete_assignment(inst: LLLInstance, sr: ShatterResult, seed: int = 0) -> list:
    """Fixed values from the first phase plus solved residual components; untouched free bits -> 0."""
    work = dict(sr.partial)
    for comp in sr.components:
        sol = solve_residual(inst, comp, sr.partial, seed=seed)
        for v, x in sol.items():
            work[v] = (x, inst.var_bits[v])
    out = []
    for v, b in enumerate(inst.var_bits):
        f = work.get(v)
        if f is None:
            out.append(0)
        elif f[1] < b:
            out.append(f[0] << (b - f[1]))
        else:
            out.append(f[0])
    return out


# Moser-Tardos

@dataclass
class MTResult:
    assignment: list
    resamples: int


def moser_tardos(inst: LLLInstance, seed: int = 0, max_resamples: int | None = None,
                 events: Sequence[int] | None = None, partial: dict | None = None) -> MTResult:
    """Resample the lowest-index violated event until none is violated.

    ``events`` restricts attention to a sub-collection; ``partial`` pins
    already fixed bits (only the free suffix of a variable is resampled).
    """
    rng = random.Random(seed)
    bits = inst.var_bits
    partial = partial or {}
    scope = list(range(len(inst.events))) if events is None else list(events)
    scope_set = set(scope)
    vars_ = sorted({v for e in scope for v in inst.events[e].vars})

    def sample(v):
        f = partial.get(v)
        k = f[1] if f is not None else 0
        free = bits[v] - k
        x = rng.getrandbits(free) if free else 0
        return ((f[0] << free) | x) if k else x

    assign = [0] * len(bits)
    for v, f in partial.items():
        if f[1] == bits[v]:
            assign[v] = f[0]
    for v in vars_:
        assign[v] = sample(v)
    bad = {e for e in scope if inst.violated(e, assign)}
    count = 0
    import heapq
    heap = list(bad)
    heapq.heapify(heap)
    while bad:
        e = heapq.heappop(heap)
        if e not in bad:
            continue
        if max_resamples is not None and count >= max_resamples:
            raise BudgetExhausted(f"still {len(bad)} violated events after {count} resamples")
        count += 1
        for v in inst.events[e].vars:
            assign[v] = sample(v)
        for v in inst.events[e].vars:
            for e2 in inst.var_events[v]:
                if e2 not in scope_set:
                    continue
                if inst.violated(e2, assign):
                    if e2 not in bad:
                        bad.add(e2)
                        heapq.heappush(heap, e2)
                else:
                    bad.discard(e2)
        if e in bad:
            heapq.heappush(heap, e)
    return MTResult(assign, count)


# sinkless orientation

class SinklessEncoding:
    """One 1-bit variable per edge (1 = lower index -> higher index); one event per full-degree node."""

    def __init__(self, g: Graph, delta: int | None = None):
        self.g = g
        self.delta = g.max_degree if delta is None else delta
        self.edges = g.edges()
        self.index = {e: i for i, e in enumerate(self.edges)}
        evs = []
        self.event_node = []
        for u in range(g.n):
            if g.degree(u) != self.delta or self.delta == 0:
                continue
            vs, into = [], []
            for v in g.adj[u]:
                a, b = (u, v) if u < v else (v, u)
                vs.append(self.index[(a, b)])
                into.append(0 if u == a else 1)
            evs.append(SinkEvent(vs, into, u))
            self.event_node.append(u)
        self.instance = LLLInstance([1] * len(self.edges), evs)

    def decode(self, assignment) -> dict:
        return {e: assignment[i] == 1 for i, e in enumerate(self.edges)}

    def labels(self, assignment) -> list:
        from .problems import orientation_to_labels
        return orientation_to_labels(self.g, self.decode(assignment))


def sinkless_to_lll(g: Graph, delta: int | None = None) -> SinklessEncoding:
    return SinklessEncoding(g, delta)


def solve_sinkless(g: Graph, seed: int = 0, method: str = "fg", delta: int | None = None):
    """End-to-end: encode, solve (first phase + residual, or Moser-Tardos), decode to node labels."""
    enc = sinkless_to_lll(g, delta)
    inst = enc.instance
    if method == "fg":
        sr = fg_first_phase(inst, seed=seed)
        assign = complete_assignment(inst, sr, seed=seed)
        info = {"components": sr.component_sizes, "residual": len(sr.residual_events)}
    elif method == "mt":
        res = moser_tardos(inst, seed=seed, max_resamples=10 * max(g.n, 1))
        assign = res.assignment
        info = {"resamples": res.resamples}
    else:
        raise ValueError(f"unknown method {method!r}")
    return enc.labels(assign), info
