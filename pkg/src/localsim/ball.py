"""Labeled radius-r neighborhoods and their canonical encoding.

A ball of radius r around u holds every node within distance r of u. Edges are
included when at least one endpoint lies at distance < r: this is exactly the
information r rounds of message passing can deliver to u, so the function view
and the message view see the same object. Nodes at distance r are boundary
nodes: their label and degree are known but their neighbor lists are not.

Local indices are assigned by BFS from the center following ports in order.
"""
from __future__ import annotations

from collections import deque
from typing import Any, Sequence

from .errors import LocalityViolation
from .graph import Graph


class Ball:
    def __init__(self, radius: int, dist, labels, degree, ports, arcs=None, ecolor=None, nodes=None):
        self.radius = radius
        self.dist = tuple(dist)
        self.labels = tuple(labels)
        self.degree = tuple(degree)
        self.ports = tuple(ports)
        self.arcs = arcs  # {(a, b): True if a -> b} for a < b, or None
        self.ecolor = ecolor  # {(a, b): color} for a < b, or None
        self.nodes = tuple(nodes) if nodes is not None else None
        self._code = None

    center = 0

    def __len__(self):
        return len(self.dist)

    def __repr__(self):
        return f"Ball(r={self.radius}, size={len(self)}, center_label={self.labels[0]!r})"

    def __eq__(self, other):
        if not isinstance(other, Ball):
            return NotImplemented
        return (self.radius, self.dist, self.labels, self.degree, self.ports, self.arcs, self.ecolor) == \
            (other.radius, other.dist, other.labels, other.degree, other.ports, other.arcs, other.ecolor)

    def __hash__(self):
        return hash((self.radius, self.dist, self.labels, self.degree, self.ports))

    @property
    def label(self):
        return self.labels[0]

    def is_inner(self, i: int) -> bool:
        return self.dist[i] < self.radius

    def neighbors(self, i: int = 0) -> tuple[int, ...]:
        p = self.ports[i]
        if p is None:
            raise LocalityViolation(f"neighbors of a boundary node (distance {self.dist[i]}) are not visible")
        return p

    def edges(self) -> list[tuple[int, int]]:
        out = set()
        for i, p in enumerate(self.ports):
            if p is not None:
                for j in p:
                    out.add((min(i, j), max(i, j)))
        return sorted(out)

    def arc(self, i: int, j: int) -> bool | None:
        if self.arcs is None:
            return None
        key = (i, j) if i < j else (j, i)
        if key not in self.arcs:
            raise LocalityViolation("edge not visible in this ball")
        d = self.arcs[key]
        return d if i < j else not d

    def edge_color(self, i: int, j: int) -> int | None:
        if self.ecolor is None:
            return None
        key = (i, j) if i < j else (j, i)
        if key not in self.ecolor:
            raise LocalityViolation("edge not visible in this ball")
        return self.ecolor[key]

    def successor(self, i: int = 0) -> int | None:
        for j in self.neighbors(i):
            if self.arc(i, j):
                return j
        return None

    def predecessor(self, i: int = 0) -> int | None:
        for j in self.neighbors(i):
            if self.arc(j, i):
                return j
        return None

    def within(self, r: int) -> "Ball":
        """The ball of radius r <= self.radius around the same center."""
        return self.sub_ball(0, r)

    def sub_ball(self, i: int, r: int) -> "Ball":
        """Ball of radius r around local node i; needs dist(i) + r <= radius."""
        if r < 0:
            raise ValueError("negative radius")
        if self.dist[i] + r > self.radius:
            raise LocalityViolation(
                f"asked for radius {r} around a node at distance {self.dist[i]} inside a radius-{self.radius} ball")
        return _extract(i, r, lambda x: self.ports[x], self.labels, self.degree,
                        self.arcs, self.ecolor, self.nodes)

    def canonical_code(self):
        if self._code is None:
            self._code = canonical_code(self)
        return self._code


def _extract(u, r, adj_of, labels, degree, arcs_src, ecol_src, handles, arc_fn=None, col_fn=None):
    """BFS extraction shared by ``ball`` and ``Ball.sub_ball``.

    ``arcs_src``/``ecol_src`` are either dicts keyed by (min, max) over the
    source index space, or None. ``arc_fn``/``col_fn`` override them with
    callables for the graph case.
    """
    local = {u: 0}
    order = [u]
    dist = [0]
    q = deque([u])
    while q:
        x = q.popleft()
        dx = dist[local[x]]
        if dx >= r:
            continue
        for y in adj_of(x):
            if y not in local:
                local[y] = len(order)
                order.append(y)
                dist.append(dx + 1)
                q.append(y)
    ports = []
    for x in order:
        if dist[local[x]] < r:
            ports.append(tuple(local[y] for y in adj_of(x)))
        else:
            ports.append(None)
    arcs = {} if (arcs_src is not None or arc_fn is not None) else None
    ecol = {} if (ecol_src is not None or col_fn is not None) else None
    if arcs is not None or ecol is not None:
        for x in order:
            if dist[local[x]] >= r:
                continue
            for y in adj_of(x):
                a, b = local[x], local[y]
                key = (a, b) if a < b else (b, a)
                sk = (x, y) if x < y else (y, x)
                if arcs is not None and key not in arcs:
                    if arc_fn is not None:
                        fwd = arc_fn(x, y)
                    else:
                        d = arcs_src[sk]
                        fwd = d if x < y else not d
                    arcs[key] = fwd if a < b else not fwd
                if ecol is not None and key not in ecol:
                    ecol[key] = col_fn(x, y) if col_fn is not None else ecol_src[sk]
    lab = [labels[x] if labels is not None else None for x in order]
    deg = [degree(x) if callable(degree) else degree[x] for x in order]
    hnd = [handles[x] for x in order] if handles is not None else order
    return Ball(r, dist, lab, deg, ports, arcs, ecol, hnd)


def ball(g: Graph, u: int, r: int, labels: Sequence[Any] | None = None) -> Ball:
    if not (0 <= u < g.n):
        raise IndexError(f"node {u} out of range for n={g.n}")
    if r < 0:
        raise ValueError("radius must be >= 0")
    return _extract(u, r, g.neighbors, labels, g.degree, None, None, None,
                    arc_fn=g.arc if g.oriented else None,
                    col_fn=g.color_of if g.edge_color is not None else None)


# canonical encoding

def _rank(values):
    keys = sorted(set(values))
    pos = {k: i for i, k in enumerate(keys)}
    return [pos[v] for v in values]


def _refine(colors, nbr):
    """Color refinement until the partition stops splitting."""
    k = len(set(colors))
    while True:
        sig = [(colors[i], tuple(sorted((colors[j], a) for j, a in nbr[i]))) for i in range(len(colors))]
        new = _rank(sig)
        k2 = len(set(new))
        if k2 == k:
            return new
        colors, k = new, k2


def canonical_code(b: Ball):
    """Isomorphism-invariant code of a ball (isomorphisms fix the center and keep labels).

    Color refinement on (distance, label, degree) and edge attributes, then
    individualization with twin pruning; the lexicographically smallest
    resulting code wins. Port numbers do not enter the code.
    """
    size = len(b)
    attrs = [(b.dist[i], repr(b.labels[i]), b.degree[i]) for i in range(size)]
    nbr = [[] for _ in range(size)]
    for a, c in b.edges():
        d = 0
        if b.arcs is not None:
            d = 1 if b.arcs[(a, c)] else -1
        col = b.ecolor[(a, c)] if b.ecolor is not None else 0
        nbr[a].append((c, (d, col)))
        nbr[c].append((a, (-d, col)))
    base = _rank(attrs)

    def emit(colors):
        order = sorted(range(size), key=lambda i: colors[i])
        pos = {v: i for i, v in enumerate(order)}
        nodes = tuple(attrs[v] for v in order)
        es = []
        for v in range(size):
            for w, (d, col) in nbr[v]:
                if pos[v] < pos[w]:
                    es.append((pos[v], pos[w], d, col))
        return (b.radius, nodes, tuple(sorted(es)))

    def twin_key(v, colors):
        return (colors[v], tuple(sorted((w, a) for w, a in nbr[v])))

    best = None

    def search(colors):
        nonlocal best
        colors = _refine(colors, nbr)
        if len(set(colors)) == size:
            code = emit(colors)
            if best is None or code < best:
                best = code
            return
        counts = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        cell = [v for v in range(size) if colors[v] == target]
        seen = set()
        for v in cell:
            tk = twin_key(v, colors)
            # nodes with identical neighborhoods are swapped by an automorphism
            if tk in seen:
                continue
            seen.add(tk)
            nc = [2 * c + (0 if c != target or w == v else 1) for w, c in enumerate(colors)]
            search(nc)

    search(base)
    return best
