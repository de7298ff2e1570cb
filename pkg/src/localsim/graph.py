"""Graph representation, generators, identifiers and random tapes."""
from __future__ import annotations

import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidParameters, TapeExhausted


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=True)
class Graph:
    """Simple undirected graph with optional arc directions and edge colors.

    Neighbor lists are sorted; the index of a neighbor in that list is its port.
    ``orientation[(a, b)]`` with a < b is True when the arc goes a -> b.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    orientation: dict | None = field(default=None, compare=True)
    edge_color: dict | None = field(default=None, compare=True)
    max_degree: int = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], arcs: bool = False,
                   colors: dict | None = None) -> "Graph":
        """Build a graph. With ``arcs=True`` each pair (u, v) is read as an arc u -> v."""
        if n < 0:
            raise InvalidParameters("negative node count")
        nbrs: list[set] = [set() for _ in range(n)]
        orient = {} if arcs else None
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameters(f"edge ({u},{v}) out of range")
            if u == v:
                raise InvalidParameters(f"self-loop at {u}")
            if v in nbrs[u]:
                raise InvalidParameters(f"multi-edge ({u},{v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
            if arcs:
                orient[_key(u, v)] = u < v
        ecol = None
        if colors is not None:
            ecol = {_key(*k): int(c) for k, c in colors.items()}
        adj = tuple(tuple(sorted(s)) for s in nbrs)
        g = cls(n, adj, orient, ecol, max((len(a) for a in adj), default=0))
        if ecol is not None:
            g._check_edge_coloring()
        return g

    def _check_edge_coloring(self):
        for u in range(self.n):
            seen = set()
            for v in self.adj[u]:
                c = self.edge_color.get(_key(u, v))
                if c is None:
                    raise InvalidParameters(f"edge ({u},{v}) has no color")
                if c in seen:
                    raise InvalidParameters(f"node {u} has two edges of color {c}")
                seen.add(c)

    # basic access
    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adj[u]
        # neighbor lists are short; bisect is not worth it
        return v in a

    def port(self, u: int, v: int) -> int:
        return self.adj[u].index(v)

    @property
    def oriented(self) -> bool:
        return self.orientation is not None

    def arc(self, u: int, v: int) -> bool | None:
        """True if the edge is directed u -> v, False if v -> u, None if unoriented."""
        if self.orientation is None:
            return None
        d = self.orientation[_key(u, v)]
        return d if u < v else not d

    def color_of(self, u: int, v: int) -> int | None:
        if self.edge_color is None:
            return None
        return self.edge_color[_key(u, v)]

    def successor(self, u: int) -> int | None:
        for v in self.adj[u]:
            if self.arc(u, v):
                return v
        return None

    def predecessor(self, u: int) -> int | None:
        for v in self.adj[u]:
            if self.arc(v, u):
                return v
        return None

    def bfs(self, src: int, limit: int | None = None, alive=None) -> dict[int, int]:
        dist = {src: 0}
        q = deque([src])
        while q:
            x = q.popleft()
            if limit is not None and dist[x] >= limit:
                continue
            for y in self.adj[x]:
                if y not in dist and (alive is None or y in alive):
                    dist[y] = dist[x] + 1
                    q.append(y)
        return dist

    def induced(self, nodes: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``nodes``; returns it with the list of original indices."""
        keep = sorted(set(nodes))
        pos = {v: i for i, v in enumerate(keep)}
        edges = []
        colors = {} if self.edge_color is not None else None
        for u in keep:
            for v in self.adj[u]:
                if u < v and v in pos:
                    if self.orientation is not None and not self.orientation[(u, v)]:
                        edges.append((pos[v], pos[u]))
                    else:
                        edges.append((pos[u], pos[v]))
                    if colors is not None:
                        colors[(pos[u], pos[v])] = self.edge_color[(u, v)]
        return Graph.from_edges(len(keep), edges, arcs=self.oriented, colors=colors), keep

    # text format
    def to_text(self) -> str:
        flags = []
        if self.oriented:
            flags.append("directed")
        if self.edge_color is not None:
            flags.append("edgecolored")
        lines = [f"{self.n} {self.m} {','.join(flags) if flags else '-'}"]
        for u, v in self.edges():
            a, b = (u, v)
            if self.oriented and not self.orientation[(u, v)]:
                a, b = v, u
            if self.edge_color is not None:
                lines.append(f"{a} {b} {self.edge_color[(u, v)]}")
            else:
                lines.append(f"{a} {b}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows:
            raise InvalidParameters("empty graph file")
        head = rows[0]
        if len(head) not in (2, 3):
            raise InvalidParameters("bad header line")
        n, m = int(head[0]), int(head[1])
        flags = set() if len(head) < 3 or head[2] == "-" else set(head[2].split(","))
        unknown = flags - {"directed", "edgecolored"}
        if unknown:
            raise InvalidParameters(f"unknown flags {sorted(unknown)}")
        body = rows[1:]
        if len(body) != m:
            raise InvalidParameters(f"header says {m} edges, found {len(body)}")
        colored = "edgecolored" in flags
        edges, colors = [], {} if colored else None
        for r in body:
            u, v = int(r[0]), int(r[1])
            edges.append((u, v))
            if colored:
                if len(r) < 3:
                    raise InvalidParameters("missing edge color")
                colors[(u, v)] = int(r[2])
        return cls.from_edges(n, edges, arcs="directed" in flags, colors=colors)


def power_graph(g: Graph, r: int) -> Graph:
    """Graph on the same nodes joining every pair at distance 1..r."""
    if r < 1:
        raise InvalidParameters("power graph radius must be >= 1")
    if r == 1:
        return g
    edges = []
    for u in range(g.n):
        for v in g.bfs(u, limit=r):
            if v > u:
                edges.append((u, v))
    return Graph.from_edges(g.n, edges)


# generators

def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParameters("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], arcs=True)


def path(n: int) -> Graph:
    if n < 1:
        raise InvalidParameters("path needs n >= 1")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], arcs=True)


def branching_tree_size(delta: int, layers: int) -> int:
    if delta == 2:
        return 1 + 2 * layers
    if layers == 0:
        return 1
    return 1 + delta * ((delta - 1) ** layers - 1) // (delta - 2)


def branching_tree(delta: int, layers: int | None = None, n: int | None = None) -> Graph:
    """Rooted tree where the root has ``delta`` children and every other internal node ``delta-1``.

    Nodes are created in BFS order, so passing ``n`` truncates the last layer.
    Edges carry a proper coloring with colors 1..delta.
    """
    if delta < 1:
        raise InvalidParameters("branching tree needs delta >= 1")
    if layers is None and n is None:
        raise InvalidParameters("give layers or n")
    if layers is not None and layers < 0:
        raise InvalidParameters("layers must be >= 0")
    target = n if n is not None else branching_tree_size(delta, layers) if delta != 1 else min(2, 1 + layers)
    if target < 1:
        raise InvalidParameters("tree needs at least one node")
    edges, colors = [], {}
    depth = [0]
    parent_color = [0]
    q = deque([0])
    count = 1
    while q and count < target:
        u = q.popleft()
        if layers is not None and depth[u] >= layers:
            continue
        free = [c for c in range(1, delta + 1) if c != parent_color[u]]
        for c in free:
            if count >= target:
                break
            v = count
            count += 1
            edges.append((u, v))
            colors[(u, v)] = c
            depth.append(depth[u] + 1)
            parent_color.append(c)
            q.append(v)
    return Graph.from_edges(count, edges, colors=colors)


def random_regular(n: int, delta: int, seed: int = 0) -> Graph:
    """Uniform-ish random delta-regular simple graph via stub pairing with retry."""
    if delta < 0 or n < 0:
        raise InvalidParameters("negative parameter")
    if (n * delta) % 2:
        raise InvalidParameters("n * delta must be even")
    if delta >= n and n > 0 and delta > 0:
        raise InvalidParameters("delta must be < n")
    rng = random.Random(seed)
    if delta == 0:
        return Graph.from_edges(n, [])

    def suitable(edges, potential):
        if not potential:
            return True
        nodes = list(potential)
        for i, s1 in enumerate(nodes):
            for s2 in nodes[i + 1:]:
                if _key(s1, s2) not in edges:
                    return True
        return False

    def attempt():
        edges = set()
        stubs = [v for v in range(n) for _ in range(delta)]
        while stubs:
            potential = defaultdict(int)
            rng.shuffle(stubs)
            it = iter(stubs)
            for s1, s2 in zip(it, it):
                e = _key(s1, s2)
                if s1 != s2 and e not in edges:
                    edges.add(e)
                else:
                    potential[s1] += 1
                    potential[s2] += 1
            if not suitable(edges, potential):
                return None
            stubs = [v for v, c in potential.items() for _ in range(c)]
        return edges

    while True:
        edges = attempt()
        if edges is not None:
            return Graph.from_edges(n, sorted(edges))


def random_bounded_degree(n: int, delta: int, seed: int = 0, tries: int | None = None) -> Graph:
    """Random graph with max degree <= delta: try ``tries`` uniform pairs, keep the legal ones."""
    if n < 1 or delta < 0:
        raise InvalidParameters("need n >= 1 and delta >= 0")
    rng = random.Random(seed)
    deg = [0] * n
    edges = set()
    for _ in range(tries if tries is not None else n * delta):
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or deg[u] >= delta or deg[v] >= delta:
            continue
        e = _key(u, v)
        if e in edges:
            continue
        edges.add(e)
        deg[u] += 1
        deg[v] += 1
    return Graph.from_edges(n, sorted(edges))


FAMILIES = ("cycle", "path", "branching_tree", "random_regular", "random_bounded_degree")


def generate(family: str, seed: int = 0, **params) -> Graph:
    if family == "cycle":
        return cycle(int(params["n"]))
    if family == "path":
        return path(int(params["n"]))
    if family == "branching_tree":
        return branching_tree(int(params["delta"]), params.get("layers"), params.get("n"))
    if family == "random_regular":
        return random_regular(int(params["n"]), int(params["delta"]), seed)
    if family == "random_bounded_degree":
        return random_bounded_degree(int(params["n"]), int(params["delta"]), seed, params.get("tries"))
    raise InvalidParameters(f"unknown family {family!r}")


# identifiers

@dataclass(frozen=True)
class IdAssignment:
    ids: tuple[int, ...]
    range_bound: int
    exponent: int | None = None

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise InvalidParameters("ids must be distinct")
        if any(not (1 <= i < self.range_bound) for i in self.ids):
            raise InvalidParameters("ids must lie in [1, s)")

    def __getitem__(self, u):
        return self.ids[u]

    def __len__(self):
        return len(self.ids)

    def to_text(self) -> str:
        return "".join(f"{i}\n" for i in self.ids)

    @classmethod
    def from_text(cls, text: str, range_bound: int | None = None, exponent: int | None = None):
        ids = tuple(int(x) for x in text.split())
        s = range_bound if range_bound is not None else max(ids, default=0) + 1
        return cls(ids, s, exponent)


def id_range(n: int, exponent: int = 3) -> int:
    return max(n ** exponent, n + 1)


def orientation_order(g: Graph) -> list[int]:
    """Nodes of an oriented path in arc order; other graphs fall back to index order."""
    if g.oriented and g.n > 0 and g.max_degree <= 2 and g.m == g.n - 1:
        starts = [u for u in range(g.n) if g.predecessor(u) is None]
        if len(starts) == 1:
            order, u = [], starts[0]
            while u is not None:
                order.append(u)
                u = g.successor(u)
            if len(order) == g.n:
                return order
    return list(range(g.n))


def assign_ids(g: Graph, exponent: int = 3, seed: int = 0, mode: str = "random",
               range_bound: int | None = None) -> IdAssignment:
    """Distinct ids sampled without replacement from [1, s), s = n^C unless overridden."""
    if exponent < 1:
        raise InvalidParameters("exponent must be >= 1")
    s = range_bound if range_bound is not None else id_range(g.n, exponent)
    if s - 1 < g.n:
        raise InvalidParameters("id range too small")
    rng = random.Random(seed)
    sample = rng.sample(range(1, s), g.n)
    if mode == "random":
        ids = sample
    elif mode == "increasing":
        ids = [0] * g.n
        for u, x in zip(orientation_order(g), sorted(sample)):
            ids[u] = x
    else:
        raise InvalidParameters(f"unknown id mode {mode!r}")
    return IdAssignment(tuple(ids), s, exponent if range_bound is None else None)


# random bits

@dataclass(frozen=True)
class RandomTape:
    """Per-node bit strings of exactly ``budget`` bits, stored as ints read MSB first."""

    blocks: tuple[int, ...]
    budget: int
    seed: int | None = None

    @classmethod
    def generate(cls, n: int, budget: int = 256, seed: int = 0) -> "RandomTape":
        rng = random.Random(seed)
        return cls(tuple(rng.getrandbits(budget) if budget else 0 for _ in range(n)), budget, seed)

    def __post_init__(self):
        lim = 1 << self.budget
        if any(not (0 <= b < lim) for b in self.blocks):
            raise InvalidParameters("tape block does not fit the budget")

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, u):
        return self.blocks[u]

    def bits(self, u: int, start: int, count: int) -> int:
        return read_bits(self.blocks[u], self.budget, start, count)

    def reader(self, u: int) -> "TapeReader":
        return TapeReader(self.blocks[u], self.budget)

    def with_blocks(self, updates: dict) -> "RandomTape":
        b = list(self.blocks)
        for u, x in updates.items():
            b[u] = x
        return RandomTape(tuple(b), self.budget, None)

    def bitstring(self, u: int) -> str:
        return format(self.blocks[u], f"0{self.budget}b") if self.budget else ""


def read_bits(block: int, budget: int, start: int, count: int) -> int:
    if count < 0 or start < 0:
        raise ValueError("negative bit range")
    if start + count > budget:
        raise TapeExhausted(f"need bits [{start},{start + count}) but the budget is {budget}")
    if count == 0:
        return 0
    return (block >> (budget - start - count)) & ((1 << count) - 1)


class TapeReader:
    """Sequential MSB-first reader over one node's block."""

    def __init__(self, block: int, budget: int):
        self.block = block
        self.budget = budget
        self.pos = 0

    def read(self, count: int) -> int:
        x = read_bits(self.block, self.budget, self.pos, count)
        self.pos += count
        return x

    def bit(self) -> int:
        return self.read(1)
