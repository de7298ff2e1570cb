"""Network decompositions: sequential ball carving, the deterministic id-bit process, and MPX clustering."""
from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .graph import Graph, IdAssignment
from .problems import CheckReport


@dataclass
class NetworkDecomposition:
    """Per-node color (1..c) and cluster id; clusters have diameter <= d (strong or weak)."""

    color: list
    cluster: list
    c: int
    d: int
    kind: str = "strong"
    stats: dict = field(default_factory=dict)

    def clusters(self) -> dict:
        out: dict = {}
        for v, k in enumerate(self.cluster):
            out.setdefault(k, []).append(v)
        return out

    def to_dict(self) -> dict:
        return {"c": self.c, "d": self.d, "kind": self.kind, "color": list(self.color),
                "cluster": list(self.cluster)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkDecomposition":
        return cls(list(d["color"]), list(d["cluster"]), int(d["c"]), int(d["d"]), d.get("kind", "strong"))


@dataclass
class PartialClustering:
    cluster: list  # cluster id or None
    clustered_count: int
    certificates: dict = field(default_factory=dict)  # cluster -> (source, radius)
    stats: dict = field(default_factory=dict)


def _strong_diameter(g: Graph, members: list) -> float:
    ms = set(members)
    best = 0
    for u in members:
        dist = g.bfs(u, alive=ms)
        if len(dist) < len(ms):
            return math.inf
        best = max(best, max(dist.values()))
    return best


def _weak_diameter(g: Graph, members: list, limit: int | None = None) -> float:
    ms = set(members)
    best = 0
    for u in members:
        dist = g.bfs(u, limit=limit)
        got = [dist[v] for v in ms if v in dist]
        if len(got) < len(ms):
            return math.inf
        best = max(best, max(got))
    return best


def cluster_diameters(g: Graph, nd: NetworkDecomposition) -> dict:
    f = _strong_diameter if nd.kind == "strong" else _weak_diameter
    return {k: f(g, m) for k, m in nd.clusters().items()}


def validate(g: Graph, nd: NetworkDecomposition) -> CheckReport:
    """Same-color clusters non-adjacent; every cluster within the declared diameter bound."""
    viol = []
    if len(nd.color) != g.n or len(nd.cluster) != g.n:
        return CheckReport(False, [(-1, "decomposition does not cover every node")])
    for v in range(g.n):
        if not (1 <= nd.color[v] <= nd.c):
            viol.append((v, f"color {nd.color[v]} outside 1..{nd.c}"))
    groups = nd.clusters()
    for k, members in groups.items():
        cols = {nd.color[v] for v in members}
        if len(cols) > 1:
            viol.append((members[0], f"cluster {k} has several colors"))
    for u, v in g.edges():
        if nd.color[u] == nd.color[v] and nd.cluster[u] != nd.cluster[v]:
            viol.append((u, f"adjacent to node {v} of another cluster with the same color"))
    for k, members in groups.items():
        # twice the eccentricity of one member bounds the diameter; fall back to the exact value
        probe = k if k in members else members[0]
        ms = set(members)
        if nd.kind == "strong":
            dist = g.bfs(probe, alive=ms)
            ecc = max(dist.values()) if len(dist) == len(ms) else math.inf
        else:
            dist = g.bfs(probe, limit=nd.d)
            ecc = max((dist[v] for v in ms), default=0) if all(v in dist for v in ms) else math.inf
        if 2 * ecc <= nd.d:
            continue
        if nd.kind == "strong":
            dm = _strong_diameter(g, members)
        else:
            dm = _weak_diameter(g, members, limit=nd.d)
        if dm > nd.d:
            viol.append((members[0], f"cluster {k} diameter {dm} exceeds {nd.d}"))
    return CheckReport(not viol, viol)


def _order_keys(g: Graph, ids):
    if ids is None:
        return list(range(g.n))
    return list(ids.ids) if isinstance(ids, IdAssignment) else list(ids)


# sequential ball carving

def ball_carving_sequential(g: Graph, ids=None) -> NetworkDecomposition:
    """Grow B(u, i) while |B(u, i+1)| > 2|B(u, i)|; cluster B(u, i), delete its boundary for this color.

    Nodes are visited in increasing id (or index) order. The deleted boundary
    nodes form the residual graph carved with the next color.
    """
    keys = _order_keys(g, ids)
    color = [0] * g.n
    cluster = [None] * g.n
    remaining = set(range(g.n))
    c = 0
    radii = []
    fractions = []
    while remaining:
        c += 1
        live = set(remaining)
        deleted = set()
        start = len(remaining)
        clustered = 0
        for u in sorted(remaining, key=lambda v: keys[v]):
            if u not in live:
                continue
            inside = {u}
            frontier = [u]
            i = 0
            while True:
                nxt = []
                seen = set()
                for x in frontier:
                    for y in g.adj[x]:
                        if y in live and y not in inside and y not in seen:
                            seen.add(y)
                            nxt.append(y)
                if len(inside) + len(nxt) <= 2 * len(inside):
                    break
                inside |= seen
                frontier = nxt
                i += 1
            # charging: the deleted boundary is never larger than the cluster
            assert len(nxt) <= len(inside)
            for v in inside:
                color[v] = c
                cluster[v] = u
            clustered += len(inside)
            radii.append(i)
            live -= inside
            live -= seen
            deleted |= seen
        assert 2 * clustered >= start, "a carve clustered fewer than half the nodes"
        fractions.append(clustered / start)
        remaining = deleted
    rmax = max(radii, default=0)
    return NetworkDecomposition(color, cluster, c, 2 * rmax, "strong",
                                {"phase_fractions": fractions, "max_radius": rmax})


# deterministic decomposition over id bits

def _bits_needed(s: int) -> int:
    return max(1, math.ceil(math.log2(s))) if s > 1 else 1


def _components(g: Graph, alive: set):
    seen = set()
    for s in sorted(alive):
        if s in seen:
            continue
        comp = []
        q = deque([s])
        seen.add(s)
        while q:
            x = q.popleft()
            comp.append(x)
            for y in g.adj[x]:
                if y in alive and y not in seen:
                    seen.add(y)
                    q.append(y)
        yield comp


def distributed_decomposition(g: Graph, ids, bits: int | None = None, observer=None) -> NetworkDecomposition:
    """Carves of b phases over id bits (most significant first).

    In phase i a cluster is active when bit i of its id is 0. Each step, every
    alive node of an inactive cluster adjacent to an active cluster proposes to
    the adjacent active cluster of smallest id. An active cluster C receiving
    at least |C|/(2b) proposals absorbs them; otherwise the proposers are
    deleted and C stops. A phase runs at most 10*b*log2(n) steps. Deleted nodes
    are carved again with the next color.

    ``observer(carve, phase, alive, owner)`` is called after every phase.
    """
    if isinstance(ids, IdAssignment):
        idl, s = list(ids.ids), ids.range_bound
    else:
        idl = list(ids)
        s = max(idl, default=0) + 1
    if len(set(idl)) != len(idl):
        raise ValueError("ids must be unique")
    b = bits if bits is not None else _bits_needed(s)
    if any(x >= (1 << b) or x < 0 for x in idl):
        raise ValueError(f"ids do not fit in {b} bits")

    def bit(x, i):
        return (x >> (b - i)) & 1

    color = [0] * g.n
    cluster = [None] * g.n
    residual = set(range(g.n))
    c = 0
    log = []
    total_steps = 0
    rounds = 0
    while residual:
        c += 1
        n_cur = len(residual)
        t = math.ceil(10 * b * math.log2(n_cur)) if n_cur > 1 else 0
        alive = set(residual)
        owner = {v: idl[v] for v in alive}  # cluster id per alive node
        members = {idl[v]: {v} for v in alive}
        radius = {idl[v]: 0 for v in alive}
        deleted_total = 0
        carve = {"n": n_cur, "t": t, "phases": []}
        for i in range(1, b + 1):
            stopped = set()
            grow_steps: dict = {}
            deleted_phase = 0
            steps = 0
            for _ in range(t):
                props: dict = {}
                for v in alive:
                    cv = owner[v]
                    if bit(cv, i) == 0:
                        continue
                    best = None
                    for y in g.adj[v]:
                        if y in alive:
                            cy = owner[y]
                            if bit(cy, i) == 0 and cy not in stopped and (best is None or cy < best):
                                best = cy
                    if best is not None:
                        props.setdefault(best, []).append(v)
                if not props:
                    break
                steps += 1
                rounds += 2 * max(radius[k] for k in props) + 2
                for C in sorted(props):
                    P = props[C]
                    if 2 * b * len(P) >= len(members[C]):
                        for v in P:
                            members[owner[v]].discard(v)
                            owner[v] = C
                            members[C].add(v)
                        grow_steps[C] = grow_steps.get(C, 0) + 1
                        radius[C] += 1
                    else:
                        for v in P:
                            members[owner[v]].discard(v)
                            del owner[v]
                            alive.discard(v)
                        deleted_phase += len(P)
                        stopped.add(C)
            total_steps += steps
            # growth bound: (1 + 1/(2b))^g <= |C| <= n, so g < 10 b log2 n
            for C, gs in grow_steps.items():
                assert (2 * b + 1) ** gs <= len(members[C]) * (2 * b) ** gs
                assert gs < max(t, 1)
            assert 2 * b * deleted_phase <= n_cur, "phase deleted more than n/(2b) nodes"
            deleted_total += deleted_phase
            assert 2 * b * deleted_total <= i * n_cur
            # every surviving component agrees on the first i bits
            for comp in _components(g, alive):
                prefixes = {owner[v] >> (b - i) for v in comp}
                assert len(prefixes) == 1, f"component not homogeneous after phase {i}"
            carve["phases"].append({"deleted": deleted_phase, "steps": steps})
            if observer is not None:
                observer(c, i, frozenset(alive), dict(owner))
        for v in alive:
            color[v] = c
            cluster[v] = (c, owner[v])
        carve["clustered"] = len(alive)
        log.append(carve)
        residual = residual - alive
    # a node can leave the cluster its id names and restart under that id in a later carve
    lab = {k: i for i, k in enumerate(sorted(set(cluster)))}
    cluster = [lab[k] for k in cluster]
    nd = NetworkDecomposition(color, cluster, c, 0, "weak",
                              {"bits": b, "carves": log, "steps": total_steps, "rounds": rounds})
    diam = cluster_diameters(g, nd)
    nd.d = int(max(diam.values(), default=0))
    L = math.log2(g.n) if g.n > 1 else 1.0
    nd.stats["kappa"] = nd.d / L ** 3
    return nd


# MPX clustering

def _geometric(rng, cap: int):
    h = 0
    while h < cap and rng.getrandbits(1):
        h += 1
    return h, h == cap


def mpx_T(n: int, slack: int = 2) -> int:
    return math.ceil(2 * math.log2(n)) + slack if n > 1 else slack


def mpx_clustering(g: Graph, seed: int, nodes=None, ids=None, slack: int = 2, T: int | None = None) -> PartialClustering:
    """Head starts h(u) (0 w.p. 1/2, 1 w.p. 1/4, ..., capped at T); u starts its BFS at time T - h(u).

    Each node joins the source reaching it first (ties: lower source id); nodes with a
    neighbor in another cluster are dropped. Only ``nodes`` (default: all) take part.
    """
    import random
    rng = random.Random(seed)
    part = sorted(range(g.n)) if nodes is None else sorted(nodes)
    inside = set(part)
    keys = _order_keys(g, ids)
    TT = T if T is not None else mpx_T(g.n, slack)
    heads = {}
    capped = 0
    for u in part:
        h, cap = _geometric(rng, TT)
        heads[u] = h
        capped += cap
    heap = [(TT - heads[u], keys[u], u, u) for u in part]
    heapq.heapify(heap)
    src = {}
    dist = {}
    while heap:
        tm, k, s, v = heapq.heappop(heap)
        if v in src:
            continue
        src[v] = s
        dist[v] = tm - (TT - heads[s])
        for y in g.adj[v]:
            if y in inside and y not in src:
                heapq.heappush(heap, (tm + 1, k, s, y))
    cluster = [None] * g.n
    for v in part:
        if all(src[y] == src[v] for y in g.adj[v] if y in inside):
            cluster[v] = src[v]
    certs = {}
    for v in part:
        k = cluster[v]
        if k is not None:
            certs[k] = (k, max(certs.get(k, (k, 0))[1], dist[v]))
    count = sum(1 for v in part if cluster[v] is not None)
    return PartialClustering(cluster, count, certs, {"T": TT, "capped": capped, "participants": len(part)})


def mpx_decomposition(g: Graph, seed: int, ids=None, slack: int = 2) -> NetworkDecomposition:
    """Repeat MPX on the still-unclustered nodes; one color per repetition."""
    from .seeds import derive_seed
    color = [0] * g.n
    cluster = [None] * g.n
    residual = set(range(g.n))
    T = mpx_T(g.n, slack)
    c = 0
    fractions = []
    capped = 0
    while residual:
        c += 1
        pc = mpx_clustering(g, derive_seed(seed, c), nodes=residual, ids=ids, T=T)
        capped += pc.stats["capped"]
        got = [v for v in residual if pc.cluster[v] is not None]
        fractions.append(len(got) / len(residual))
        for v in got:
            color[v] = c
            cluster[v] = (c, pc.cluster[v])
        residual -= set(got)
    # cluster labels as plain ints
    lab = {k: i for i, k in enumerate(sorted(set(cluster)))}
    cluster = [lab[k] for k in cluster]
    return NetworkDecomposition(color, cluster, c, 2 * T, "weak",
                                {"T": T, "fractions": fractions, "capped": capped})
