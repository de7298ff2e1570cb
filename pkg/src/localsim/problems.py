"""Local problem specifications (label set, radius, allowed-ball predicate) and checkers."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .ball import Ball, ball
from .graph import Graph


@dataclass
class CheckReport:
    valid: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def nodes(self) -> list:
        return sorted({v for v, _ in self.violations})

    def to_dict(self):
        return {"valid": self.valid, "violations": [[v, r] for v, r in self.violations]}


class LocalProblemSpec:
    """A triple (S_out, r, allowed) plus an optional input alphabet.

    ``allowed(ball)`` returns None when the ball is fine and a short reason
    string otherwise. Ball labels are outputs, or (input, output) pairs when
    inputs are present. ``node_check`` is an optional fast path over the whole
    graph that must agree with ``allowed``.
    """

    def __init__(self, name: str, S_out, r: int, allowed: Callable, S_in=None,
                 node_check: Callable | None = None, edge_labeled: bool = False,
                 delta: int | None = None, label_ok: Callable | None = None):
        self.name = name
        self.S_out = frozenset(S_out) if S_out is not None else None
        self.S_in = frozenset(S_in) if S_in is not None else None
        self.r = r
        self.allowed = allowed
        self.node_check = node_check
        self.edge_labeled = edge_labeled
        self.delta = delta
        self.label_ok = label_ok

    def __repr__(self):
        return f"LocalProblemSpec({self.name!r}, r={self.r})"

    def prepare(self, g: Graph, labels) -> list:
        """Per-node labels that the ball predicate consumes (edge problems get resolved here)."""
        return list(labels)


def check_solution(spec: LocalProblemSpec, g: Graph, labels, inputs=None, use_balls: bool = False) -> CheckReport:
    if len(labels) != g.n:
        raise ValueError("labels must cover all nodes")
    for u, x in enumerate(labels):
        if spec.label_ok is not None:
            if not spec.label_ok(g, u, x):
                raise ValueError(f"label {x!r} at node {u} is outside the label set")
        elif spec.S_out is not None and x not in spec.S_out:
            raise ValueError(f"label {x!r} at node {u} is outside the label set")
    if spec.S_in is not None:
        if inputs is None or len(inputs) != g.n:
            raise ValueError("this problem needs input labels on every node")
        for u, x in enumerate(inputs):
            if x not in spec.S_in:
                raise ValueError(f"input {x!r} at node {u} is outside the input set")
    viol = []
    if spec.node_check is not None and not use_balls and spec.S_in is None:
        for u in range(g.n):
            why = spec.node_check(g, labels, u)
            if why is not None:
                viol.append((u, why))
    else:
        resolved = spec.prepare(g, labels)
        if spec.S_in is not None:
            resolved = list(zip(inputs, resolved))
        for u in range(g.n):
            why = spec.allowed(ball(g, u, spec.r, resolved))
            if why is not None:
                viol.append((u, why))
    return CheckReport(not viol, viol)


# proper coloring

def _coloring_allowed(b: Ball):
    c = b.labels[0]
    for j in b.neighbors(0):
        if b.labels[j] == c:
            return f"neighbor shares color {c}"
    return None


def _coloring_node(g, labels, u):
    c = labels[u]
    for v in g.adj[u]:
        if labels[v] == c:
            return f"neighbor {v} shares color {c}"
    return None


def proper_coloring(k: int) -> LocalProblemSpec:
    return LocalProblemSpec(f"proper_coloring({k})", range(1, k + 1), 1, _coloring_allowed,
                            node_check=_coloring_node)


# maximal independent set: 1 = selected, 0 = not

def _mis_allowed(b: Ball):
    me = b.labels[0]
    nb = [b.labels[j] for j in b.neighbors(0)]
    if me == 1 and 1 in nb:
        return "selected next to a selected neighbor"
    if me == 0 and 1 not in nb:
        return "unselected with no selected neighbor"
    return None


def _mis_node(g, labels, u):
    me = labels[u]
    sel = any(labels[v] == 1 for v in g.adj[u])
    if me == 1 and sel:
        return "selected next to a selected neighbor"
    if me == 0 and not sel:
        return "unselected with no selected neighbor"
    return None


def mis() -> LocalProblemSpec:
    return LocalProblemSpec("mis", (0, 1), 1, _mis_allowed, node_check=_mis_node)


def independent_set() -> LocalProblemSpec:
    """Independence only, no maximality."""
    def allowed(b):
        if b.labels[0] == 1 and any(b.labels[j] == 1 for j in b.neighbors(0)):
            return "selected next to a selected neighbor"
        return None
    return LocalProblemSpec("independent_set", (0, 1), 1, allowed)


# sinkless orientation
# Node label: tuple over ports. The slot of an edge at its lower-index endpoint
# holds 1 (edge leaves that endpoint) or 0 (edge enters it); the other slot is None.

def orientation_to_labels(g: Graph, heads: dict) -> list:
    """``heads[(a, b)]`` for a < b is True when the edge is oriented a -> b."""
    out = []
    for u in range(g.n):
        out.append(tuple((1 if heads[(u, v)] else 0) if u < v else None for v in g.adj[u]))
    return out


def labels_to_orientation(g: Graph, labels) -> dict:
    heads = {}
    for u in range(g.n):
        for i, v in enumerate(g.adj[u]):
            if u < v:
                heads[(u, v)] = labels[u][i] == 1
    return heads


def _sinkless_label_ok(g, u, x):
    if not isinstance(x, (tuple, list)) or len(x) != g.degree(u):
        return False
    for i, v in enumerate(g.adj[u]):
        if u < v and x[i] not in (0, 1):
            return False
        if u > v and x[i] is not None:
            return False
    return True


def sinkless_orientation(delta: int | None = None) -> LocalProblemSpec:
    """Nodes of degree delta (default: max degree) must have an outgoing edge."""

    def full(g):
        return g.max_degree if delta is None else delta

    spec = LocalProblemSpec("sinkless_orientation", None, 1, None, edge_labeled=True, delta=delta,
                            label_ok=_sinkless_label_ok)

    def node_check(g, labels, u):
        if g.degree(u) != full(g) or g.degree(u) == 0:
            return None
        for i, v in enumerate(g.adj[u]):
            out = labels[u][i] == 1 if u < v else labels[v][g.adj[v].index(u)] == 0
            if out:
                return None
        return "sink"

    def prepare(g, labels):
        # every node learns the direction of each incident edge: 1 = out, 0 = in
        heads = labels_to_orientation(g, labels)
        d = full(g)
        return [(d, tuple(1 if heads[(min(u, v), max(u, v))] == (u < v) else 0 for v in g.adj[u]))
                for u in range(g.n)]

    def allowed(b):
        d, dirs = b.labels[0]
        if b.degree[0] == d and d > 0 and not any(dirs):
            return "sink"
        return None

    spec.node_check = node_check
    spec.prepare = prepare
    spec.allowed = allowed
    return spec


# edge grabbing: node label = color of the incident edge it grabs (None = nothing)

def edge_grabbing(delta: int | None = None) -> LocalProblemSpec:
    def full(g):
        return g.max_degree if delta is None else delta

    def label_ok(g, u, x):
        if x is None:
            return True
        return any(g.color_of(u, v) == x for v in g.adj[u])

    spec = LocalProblemSpec("edge_grabbing", None, 1, None, delta=delta, label_ok=label_ok)

    def node_check(g, labels, u):
        c = labels[u]
        if c is None:
            return "grabs nothing" if g.degree(u) == full(g) and g.degree(u) > 0 else None
        for v in g.adj[u]:
            if g.color_of(u, v) == c and labels[v] == c:
                return f"edge to {v} grabbed from both sides"
        return None

    def prepare(g, labels):
        d = full(g)
        return [(d, x) for x in labels]

    def allowed(b):
        d, c = b.labels[0]
        if c is None:
            return "grabs nothing" if b.degree[0] == d and d > 0 else None
        for j in b.neighbors(0):
            if b.edge_color(0, j) == c and b.labels[j][1] == c:
                return "edge grabbed from both sides"
        return None

    spec.node_check = node_check
    spec.prepare = prepare
    spec.allowed = allowed
    return spec


def network_decomposition(c: int, d: int, kind: str = "strong") -> LocalProblemSpec:
    """Labels are (color, cluster) pairs; checking is delegated to the decomposition validator."""
    from .decomposition import NetworkDecomposition, validate

    spec = LocalProblemSpec(f"network_decomposition({c},{d})", None, 0, None)

    def check(g, labels):
        nd = NetworkDecomposition([x[0] for x in labels], [x[1] for x in labels], c, d, kind)
        return validate(g, nd)

    spec.check_graph = check
    return spec


def builtin(name: str, **params) -> LocalProblemSpec:
    if name == "proper_coloring":
        return proper_coloring(int(params["k"]))
    if name == "mis":
        return mis()
    if name == "independent_set":
        return independent_set()
    if name == "sinkless_orientation":
        return sinkless_orientation(params.get("delta"))
    if name == "edge_grabbing":
        return edge_grabbing(params.get("delta"))
    if name == "network_decomposition":
        return network_decomposition(int(params["c"]), int(params["d"]), params.get("kind", "strong"))
    raise ValueError(f"unknown problem {name!r}")


def check(spec: LocalProblemSpec, g: Graph, labels, inputs=None) -> CheckReport:
    """check_solution that also handles problems validated globally."""
    if hasattr(spec, "check_graph"):
        return spec.check_graph(g, labels)
    return check_solution(spec, g, labels, inputs)


# table-driven problems

def _code_key(code) -> str:
    return json.dumps(code, separators=(",", ":"))


def table_spec(table: dict) -> LocalProblemSpec:
    """Problem whose allowed balls are listed explicitly by canonical code."""
    r = int(table["r"])
    if r > 2:
        raise ValueError("table-driven problems support r <= 2 only")
    allowed_set = {_code_key(c) for c in table["allowed_balls"]}
    S_in = table.get("S_in")

    def allowed(b):
        return None if _code_key(b.canonical_code()) in allowed_set else "ball not in table"

    spec = LocalProblemSpec(table.get("name", "table"), _freeze(table["S_out"]), r, allowed,
                            S_in=_freeze(S_in) if S_in is not None else None, delta=table.get("delta"))
    return spec


def _freeze(xs):
    return [tuple(x) if isinstance(x, list) else x for x in xs]


def load_table(path) -> LocalProblemSpec:
    with open(path) as f:
        return table_spec(json.load(f))


def build_table(spec: LocalProblemSpec, graphs: Iterable[Graph], S_out, S_in=None, delta=None) -> dict:
    """Enumerate every labeling of the given small graphs and record the balls ``spec`` accepts."""
    codes = {}
    S_out = list(S_out)
    for g in graphs:
        in_choices = [None] if S_in is None else itertools.product(list(S_in), repeat=g.n)
        for ins in in_choices:
            for outs in itertools.product(S_out, repeat=g.n):
                lab = list(outs) if ins is None else list(zip(ins, outs))
                for u in range(g.n):
                    b = ball(g, u, spec.r, lab)
                    if spec.allowed(b) is None:
                        c = b.canonical_code()
                        codes[_code_key(c)] = c
    return {"name": spec.name, "S_in": list(S_in) if S_in is not None else None, "S_out": S_out,
            "r": spec.r, "delta": delta, "allowed_balls": [json.loads(k) for k in sorted(codes)]}
