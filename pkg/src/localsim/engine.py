"""Execution of LOCAL algorithms in the function view and the message view, and of SLOCAL algorithms.

Protocol contract
-----------------
``init(n, degree, label)`` returns ``(state, broadcast)``: the first message a
node sends is the same on every port (it cannot depend on port numbers it has
not yet used). ``step(state, inbox, ports)`` gets one incoming message per port
(None if nothing arrived) plus per-port edge attributes ``(out, color)`` and
returns ``(state, outgoing)`` with one message per port. ``finalize(state)``
gives the output. Exactly ``round_budget(n)`` steps are run.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .ball import Ball, ball, _extract
from .errors import LocalityViolation
from .graph import Graph


# algorithm interfaces

class LocalFunctionAlgorithm:
    """Output of a node = evaluate(n, its radius-t(n) ball)."""

    name = "function"
    cacheable = True

    def radius(self, n: int) -> int:
        raise NotImplementedError

    def evaluate(self, n: int, b: Ball):
        raise NotImplementedError


class FunctionAlgorithm(LocalFunctionAlgorithm):
    def __init__(self, radius_fn, evaluate_fn, name="function", cacheable=True):
        self._radius = radius_fn if callable(radius_fn) else (lambda n, r=radius_fn: r)
        self._evaluate = evaluate_fn
        self.name = name
        self.cacheable = cacheable

    def radius(self, n):
        return self._radius(n)

    def evaluate(self, n, b):
        return self._evaluate(n, b)


class MessageProtocol:
    name = "protocol"

    def round_budget(self, n: int) -> int:
        raise NotImplementedError

    def init(self, n: int, degree: int, label):
        raise NotImplementedError

    def step(self, state, inbox: list, ports: tuple):
        raise NotImplementedError

    def finalize(self, state):
        raise NotImplementedError


class SequentialLocalAlgorithm:
    """apply(n, ball) -> (s, t). Ball labels are pairs (input, (s, t) or None)."""

    name = "sequential"

    def locality(self, n: int) -> int:
        raise NotImplementedError

    def apply(self, n: int, b: Ball):
        raise NotImplementedError


@dataclass
class RunResult:
    labels: list
    rounds: int
    locality_used: int
    algorithm: str = ""
    n: int = 0
    seed: int | None = None
    valid: bool | None = None
    trace: list | None = None
    extra: dict = field(default_factory=dict)

    @property
    def rounds_used(self):
        return self.rounds

    def to_dict(self) -> dict:
        d = {"n": self.n, "algorithm": self.algorithm, "rounds": self.rounds,
             "labels": _jsonable(self.labels), "valid": self.valid, "seed": self.seed}
        if self.extra:
            d["extra"] = _jsonable(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        return cls(labels=d["labels"], rounds=d["rounds"], locality_used=d.get("rounds", 0),
                   algorithm=d.get("algorithm", ""), n=d.get("n", len(d["labels"])),
                   seed=d.get("seed"), valid=d.get("valid"), extra=d.get("extra", {}))


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(y) for y in x)
    if hasattr(x, "item") and not isinstance(x, (int, float, str)):
        return x.item()  # numpy scalar
    return x


# function view

def run_function_mode(alg: LocalFunctionAlgorithm, g: Graph, labels: Sequence | None = None,
                      n: int | None = None, cache: bool = False) -> RunResult:
    """labels[u] = alg.evaluate(n, ball(g, u, t(n), labels)); n defaults to g.n."""
    nn = g.n if n is None else n
    t = alg.radius(nn)
    if labels is not None and len(labels) != g.n:
        raise ValueError("labels must cover all nodes")
    memo = {} if (cache and alg.cacheable) else None
    calls = 0
    out = []
    for u in range(g.n):
        b = ball(g, u, t, labels)
        if memo is not None:
            key = b.canonical_code()
            if key in memo:
                out.append(memo[key])
                continue
        calls += 1
        y = alg.evaluate(nn, b)
        if memo is not None:
            memo[key] = y
        out.append(y)
    return RunResult(out, t, t, getattr(alg, "name", "function"), g.n,
                     extra={"evaluations": calls} if memo is not None else {})


# message view

def _port_info(g: Graph, u: int) -> tuple:
    return tuple((g.arc(u, v), g.color_of(u, v)) for v in g.adj[u])


def run_message_mode(p: MessageProtocol, g: Graph, labels: Sequence | None = None,
                     n: int | None = None) -> RunResult:
    nn = g.n if n is None else n
    t = p.round_budget(nn)
    lab = labels if labels is not None else [None] * g.n
    if len(lab) != g.n:
        raise ValueError("labels must cover all nodes")
    rev = [tuple(g.adj[v].index(u) for v in g.adj[u]) for u in range(g.n)]
    ports = [_port_info(g, u) for u in range(g.n)]
    states, outgoing = [], []
    for u in range(g.n):
        s, msg = p.init(nn, g.degree(u), lab[u])
        states.append(s)
        outgoing.append([msg] * g.degree(u))
    trace = []
    for _ in range(t):
        sent = sum(1 for o in outgoing for m in o if m is not None)
        trace.append(sent)
        inboxes = [[outgoing[v][rev[u][i]] for i, v in enumerate(g.adj[u])] for u in range(g.n)]
        new_out = []
        for u in range(g.n):
            s, o = p.step(states[u], inboxes[u], ports[u])
            if o is None:
                o = [None] * g.degree(u)
            if len(o) != g.degree(u):
                raise ValueError("protocol must emit one message per port")
            states[u] = s
            new_out.append(list(o))
        outgoing = new_out
    out = [p.finalize(s) for s in states]
    return RunResult(out, t, t, getattr(p, "name", "protocol"), g.n, trace=trace)


class _ProtocolFunction(LocalFunctionAlgorithm):
    cacheable = False

    def __init__(self, p: MessageProtocol):
        self.p = p
        self.name = getattr(p, "name", "protocol")

    def radius(self, n):
        return self.p.round_budget(n)

    def evaluate(self, n, b: Ball):
        t = self.p.round_budget(n)
        if b.radius < t:
            raise LocalityViolation("ball smaller than the round budget")
        if b.radius > t:
            b = b.within(t)
        size = len(b)
        states = [None] * size
        bcast = [None] * size
        for i in range(size):
            states[i], bcast[i] = self.p.init(n, b.degree[i], b.labels[i])
        out = [None] * size  # per-port outgoing lists once a node has stepped
        for k in range(1, t + 1):
            active = [i for i in range(size) if b.dist[i] <= t - k]
            new_states, new_out = {}, {}
            for x in active:
                nb = b.ports[x]
                inbox = []
                for y in nb:
                    if out[y] is None:
                        inbox.append(bcast[y])
                    else:
                        inbox.append(out[y][b.ports[y].index(x)])
                pinfo = tuple((b.arc(x, y), b.edge_color(x, y)) for y in nb)
                s, o = self.p.step(states[x], inbox, pinfo)
                new_states[x] = s
                new_out[x] = list(o) if o is not None else [None] * len(nb)
            for x in active:
                states[x] = new_states[x]
                out[x] = new_out[x]
        return self.p.finalize(states[0])


def function_from_protocol(p: MessageProtocol) -> LocalFunctionAlgorithm:
    """Simulate the protocol inside the ball, shrinking the active region by one hop per round."""
    return _ProtocolFunction(p)


class _FloodProtocol(MessageProtocol):
    """Every node gathers its radius-t view, then applies the function.

    Records are keyed by label, so labels must be unique (ids).
    """

    def __init__(self, alg: LocalFunctionAlgorithm):
        self.alg = alg
        self.name = getattr(alg, "name", "function")

    def round_budget(self, n):
        return self.alg.radius(n)

    def init(self, n, degree, label):
        state = {"n": n, "me": label, "partial": {label: degree}, "full": {}, "round": 0}
        return state, ({label: degree}, {})

    def step(self, state, inbox, ports):
        partial, full = state["partial"], state["full"]
        if state["round"] == 0:
            me = state["me"]
            nbr_labels = tuple(next(iter(m[0])) for m in inbox)
            full[me] = (partial[me], nbr_labels, ports)
        for m in inbox:
            if m is None:
                continue
            pm, fm = m
            for k, v in pm.items():
                partial.setdefault(k, v)
            for k, v in fm.items():
                full.setdefault(k, v)
        state["round"] += 1
        msg = (dict(partial), dict(full))
        return state, [msg] * len(ports)

    def finalize(self, state):
        n = state["n"]
        t = self.alg.radius(n)
        b = reconstruct_ball(state["me"], t, state["partial"], state["full"])
        return self.alg.evaluate(n, b)


def reconstruct_ball(me, t, partial: dict, full: dict) -> Ball:
    """Rebuild the radius-t ball from flooded records (label -> degree / adjacency)."""
    local = {me: 0}
    order = [me]
    dist = [0]
    q = deque([me])
    while q:
        x = q.popleft()
        dx = dist[local[x]]
        if dx >= t:
            continue
        for y in full[x][1]:
            if y not in local:
                local[y] = len(order)
                order.append(y)
                dist.append(dx + 1)
                q.append(y)
    ports, arcs, ecol = [], {}, {}
    has_arcs = has_col = False
    for x in order:
        i = local[x]
        if dist[i] < t:
            deg, nbrs, pinfo = full[x]
            ports.append(tuple(local[y] for y in nbrs))
            for y, (fwd, col) in zip(nbrs, pinfo):
                j = local[y]
                key = (i, j) if i < j else (j, i)
                if fwd is not None:
                    has_arcs = True
                    arcs[key] = fwd if i < j else not fwd
                if col is not None:
                    has_col = True
                    ecol[key] = col
        else:
            ports.append(None)
    degree = [partial[x] for x in order]
    return Ball(t, dist, list(order), degree, ports, arcs if has_arcs else None,
                ecol if has_col else None, None)


def protocol_from_function(alg: LocalFunctionAlgorithm) -> MessageProtocol:
    """Flooding protocol: after t rounds every node knows its t-ball and evaluates alg on it."""
    return _FloodProtocol(alg)


# sequential view

class SequentialState:
    def __init__(self, g: Graph, pairs: dict, order: list):
        self.g = g
        self.pairs = pairs
        self.order = order

    @property
    def processed(self):
        return set(self.pairs)

    def remaining(self):
        return [u for u in range(self.g.n) if u not in self.pairs]


class _SeqLabels:
    def __init__(self, inputs, pairs):
        self.inputs = inputs
        self.pairs = pairs

    def __getitem__(self, v):
        return (self.inputs[v] if self.inputs is not None else None, self.pairs.get(v))


def random_order(n: int, seed: int) -> list[int]:
    order = list(range(n))
    random.Random(seed).shuffle(order)
    return order


def max_degree_first(state: SequentialState) -> int:
    g = state.g
    return min(state.remaining(), key=lambda u: (-g.degree(u), u))


def reverse_order(state: SequentialState) -> int:
    return max(state.remaining())


class random_adversary:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def __call__(self, state):
        return self.rng.choice(state.remaining())


class random_restarts:
    """Jump to a random unprocessed node, sweep its BFS vicinity for a burst, repeat."""

    def __init__(self, seed: int, burst: int = 8):
        self.rng = random.Random(seed)
        self.burst = burst
        self.queue: list[int] = []

    def __call__(self, state):
        while self.queue:
            u = self.queue.pop(0)
            if u not in state.pairs:
                return u
        rem = state.remaining()
        start = self.rng.choice(rem)
        near = [v for v in state.g.bfs(start) if v not in state.pairs]
        self.queue = near[1:self.burst]
        return start


def run_sequential(alg: SequentialLocalAlgorithm, g: Graph, order, labels: Sequence | None = None,
                   n: int | None = None) -> RunResult:
    """Process nodes one by one; each sees the (s, t) pairs already written in its t(n)-ball.

    ``order`` is a permutation, or a callable receiving a SequentialState and
    returning the next node.
    """
    nn = g.n if n is None else n
    t = alg.locality(nn)
    pairs: dict[int, tuple] = {}
    done: list[int] = []
    view = _SeqLabels(labels, pairs)
    state = SequentialState(g, pairs, done)
    if callable(order):
        pick = order
    else:
        seq = list(order)
        if sorted(seq) != list(range(g.n)):
            raise ValueError("order must be a permutation of the nodes")
        it = iter(seq)
        pick = lambda _s: next(it)
    max_info = 0
    for _ in range(g.n):
        u = pick(state)
        if u in pairs:
            raise ValueError(f"node {u} chosen twice")
        b = ball(g, u, t, view)
        s, info = alg.apply(nn, b)
        pairs[u] = (s, info)
        done.append(u)
        if info is not None:
            max_info = max(max_info, len(repr(info)))
    out = [pairs[u][0] for u in range(g.n)]
    return RunResult(out, t, t, getattr(alg, "name", "sequential"), g.n,
                     extra={"witness_order": done, "max_info_size": max_info,
                            "info": [pairs[u][1] for u in range(g.n)]})


class SequentialAlgorithm(SequentialLocalAlgorithm):
    def __init__(self, locality, apply_fn, name="sequential"):
        self._loc = locality if callable(locality) else (lambda n, r=locality: r)
        self._apply = apply_fn
        self.name = name

    def locality(self, n):
        return self._loc(n)

    def apply(self, n, b):
        return self._apply(n, b)
