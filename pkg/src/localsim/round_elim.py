"""Round elimination for coloring on paths whose ids increase along the path.

Views are tuples of ids in path order with ``None`` standing for "past the
end of the path". A node-centered table with parameter t maps views of 2t+1
positions (center at index t) to colors. An edge-centered table with
parameter t is a (t+1/2)-round algorithm: it maps views of 2t+2 positions
(the edge's endpoints at indices t and t+1) to colors. Colors are 0..k-1.

Both eliminations output, for a view V, the set of colors the input table
gives to the element whose view is V extended by one more position on the
right, over all valid values of that position; the set is a k-bit mask.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from .errors import InvalidParameters

MAX_RANGE_BITS = 1 << 16


def _valid(view) -> bool:
    ids = [x for x in view if x is not None]
    if not ids:
        return False
    first = next(i for i, x in enumerate(view) if x is not None)
    if any(x is None for x in view[first:first + len(ids)]):
        return False
    return all(a < b for a, b in zip(ids, ids[1:]))


def windows(length: int, N: int, required: tuple) -> list[tuple]:
    """All views of the given length over ids 1..N whose ``required`` positions are ids."""
    lo, hi = min(required), max(required)
    out = []
    for a in range(lo + 1):
        for b in range(length - hi):
            m = length - a - b
            if m < hi - lo + 1 or m > N:
                continue
            for ids in itertools.combinations(range(1, N + 1), m):
                out.append((None,) * a + ids + (None,) * b)
    out.sort(key=lambda v: tuple(-1 if x is None else x for x in v))
    return out


def view_length(kind: str, t: int) -> int:
    return 2 * t + 1 if kind == "node" else 2 * t + 2


def domain(kind: str, t: int, N: int) -> list[tuple]:
    L = view_length(kind, t)
    return windows(L, N, (t,) if kind == "node" else (t, t + 1))


@dataclass
class PathAlgorithmTable:
    kind: str  # "node" or "edge"
    t: int
    N: int
    k: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("node", "edge"):
            raise ValueError("kind must be 'node' or 'edge'")
        L = view_length(self.kind, self.t)
        for v, c in self.entries.items():
            if len(v) != L or not _valid(v):
                raise ValueError(f"bad view {v!r} for a {self.kind} table with t={self.t}")
            if not (0 <= c < self.k):
                raise ValueError(f"color {c} outside range {self.k}")

    def __call__(self, view):
        try:
            return self.entries[tuple(view)]
        except KeyError:
            raise InvalidParameters(f"table is not total: no entry for {view!r}") from None

    def is_total(self) -> bool:
        return all(v in self.entries for v in domain(self.kind, self.t, self.N))

    @property
    def rounds(self) -> float:
        return self.t if self.kind == "node" else self.t + 0.5

    def colors_used(self) -> set:
        return set(self.entries.values())

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "N": self.N, "k": str(self.k) if self.k >= 1 << 53 else self.k,
                "entries": [[list(v), c if c < 1 << 53 else str(c)] for v, c in sorted(
                    self.entries.items(), key=lambda e: tuple(-1 if x is None else x for x in e[0]))]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PathAlgorithmTable":
        ent = {tuple(v): int(c) for v, c in d["entries"]}
        return cls(d["kind"], int(d["t"]), int(d["N"]), int(d["k"]), ent)

    @classmethod
    def from_json(cls, s: str) -> "PathAlgorithmTable":
        return cls.from_dict(json.loads(s))


def _extensions(view, N):
    last = view[-1]
    if last is None:
        return [None]
    return [None] + list(range(last + 1, N + 1))


def _check_range(k):
    if k > MAX_RANGE_BITS:
        raise InvalidParameters(f"color range 2^{k} is too large to represent")


def eliminate_node_to_edge(tab: PathAlgorithmTable) -> PathAlgorithmTable:
    """t-round node table -> (t-1/2)-round edge table with 2^k colors.

    The edge (u, v) sees every position of v's view except the rightmost one.
    """
    if tab.kind != "node" or tab.t < 1:
        raise ValueError("need a node-centered table with t >= 1")
    _check_range(tab.k)
    out = {}
    for e in domain("edge", tab.t - 1, tab.N):
        m = 0
        for y in _extensions(e, tab.N):
            m |= 1 << tab(e + (y,))
        out[e] = m
    return PathAlgorithmTable("edge", tab.t - 1, tab.N, 1 << tab.k, out)


def eliminate_edge_to_node(tab: PathAlgorithmTable) -> PathAlgorithmTable:
    """(t+1/2)-round edge table -> t-round node table with 2^k colors.

    A node sees every position of its right edge's view except the rightmost one.
    A node that may be last on the path gets no color from that extension.
    """
    if tab.kind != "edge":
        raise ValueError("need an edge-centered table")
    _check_range(tab.k)
    out = {}
    for v in domain("node", tab.t, tab.N):
        m = 0
        for y in _extensions(v, tab.N):
            ext = v + (y,)
            if ext[tab.t + 1] is None:
                continue  # no right edge: contributes no color (the mask may be empty)
            m |= 1 << tab(ext)
        out[v] = m
    return PathAlgorithmTable("node", tab.t, tab.N, 1 << tab.k, out)


def eliminate(tab: PathAlgorithmTable) -> PathAlgorithmTable:
    return eliminate_node_to_edge(tab) if tab.kind == "node" else eliminate_edge_to_node(tab)


def masks_by_paths(tab: PathAlgorithmTable) -> dict:
    """Second route to the elimination masks: walk every increasing path over [N] and
    collect, per view of the eliminated table, the colors actually produced."""
    L = view_length(tab.kind, tab.t)
    if tab.kind == "node":
        new_kind, new_t = "edge", tab.t - 1
    else:
        new_kind, new_t = "node", tab.t
    Lnew = view_length(new_kind, new_t)
    pad = L + 2
    out: dict = {w: 0 for w in domain(new_kind, new_t, tab.N)}
    for size in range(1, tab.N + 1):
        for ids in itertools.combinations(range(1, tab.N + 1), size):
            seq = (None,) * pad + ids + (None,) * pad
            # each input-table view V occurring on the path; the derived view is V minus its last entry
            for s in range(len(seq) - L + 1):
                V = seq[s:s + L]
                # V must be an input view and V minus its last entry a derived view
                centers = (tab.t - 1, tab.t) if tab.kind == "node" else (tab.t, tab.t + 1)
                if any(V[c] is None for c in centers):
                    continue
                W = V[:Lnew]
                out[W] = out.get(W, 0) | (1 << tab(V))
    return out


@dataclass
class ViolationWitness:
    window: tuple
    positions: tuple
    color: int

    def to_dict(self):
        return {"window": list(self.window), "positions": list(self.positions), "color": self.color}


@dataclass
class TableReport:
    valid: bool
    witness: ViolationWitness | None = None
    checked: int = 0

    def __bool__(self):
        return self.valid


def verify_table(tab: PathAlgorithmTable) -> TableReport:
    """Every window holding two adjacent elements gets two different colors."""
    L = view_length(tab.kind, tab.t)
    if tab.kind == "node":
        req = (tab.t, tab.t + 1)
    else:
        req = (tab.t, tab.t + 1, tab.t + 2)
    count = 0
    for w in windows(L + 1, tab.N, req):
        count += 1
        a, b = tab(w[:-1]), tab(w[1:])
        if a == b:
            pos = (tab.t, tab.t + 1) if tab.kind == "node" else ((tab.t, tab.t + 1), (tab.t + 1, tab.t + 2))
            return TableReport(False, ViolationWitness(w, pos, a), count)
    return TableReport(True, None, count)


def replay_witness(tab: PathAlgorithmTable, wit: ViolationWitness) -> bool:
    return tab(wit.window[:-1]) == tab(wit.window[1:]) == wit.color


def zero_round_analysis(tab: PathAlgorithmTable):
    """For a 0-round node table: two ids with the same color (adjacent on an increasing path)
    or the string "injective"."""
    if tab.kind != "node" or tab.t != 0:
        raise ValueError("need a 0-round node-centered table")
    seen = {}
    for i in range(1, tab.N + 1):
        c = tab((i,))
        if c in seen:
            return ViolationWitness((seen[c], i), (0, 1), c)
        seen[c] = i
    return "injective"


# table builders for the corpus

def identity_table(kind: str, t: int, N: int) -> PathAlgorithmTable:
    """Node tables color by own id; edge tables by the index of the (left, right) id pair."""
    ent = {}
    for v in domain(kind, t, N):
        if kind == "node":
            ent[v] = v[t] - 1
        else:
            a, b = v[t], v[t + 1]
            ent[v] = (a - 1) * N + (b - 1)
    return PathAlgorithmTable(kind, t, N, N if kind == "node" else N * N, ent)


def constant_table(kind: str, t: int, N: int, k: int = 1) -> PathAlgorithmTable:
    return PathAlgorithmTable(kind, t, N, k, {v: 0 for v in domain(kind, t, N)})


def _conflicts(kind: str, t: int, N: int):
    L = view_length(kind, t)
    req = (t, t + 1) if kind == "node" else (t, t + 1, t + 2)
    nb: dict = {v: set() for v in domain(kind, t, N)}
    for w in windows(L + 1, N, req):
        a, b = w[:-1], w[1:]
        nb[a].add(b)
        nb[b].add(a)
    return nb


def dsatur_table(kind: str, t: int, N: int, k: int) -> PathAlgorithmTable | None:
    """Greedy saturation coloring of the view conflict graph with k colors, or None if it gets stuck."""
    nb = _conflicts(kind, t, N)
    color: dict = {}
    sat = {v: set() for v in nb}
    while len(color) < len(nb):
        v = max((x for x in nb if x not in color),
                key=lambda x: (len(sat[x]), len(nb[x]), tuple(-1 if y is None else -y for y in x)))
        free = [c for c in range(k) if c not in sat[v]]
        if not free:
            return None
        color[v] = free[0]
        for w in nb[v]:
            sat[w].add(free[0])
    return PathAlgorithmTable(kind, t, N, k, color)


def fuzz_table(base: PathAlgorithmTable, k: int, seed: int, tries: int = 200) -> PathAlgorithmTable:
    """Random recolorings of a valid table that keep it valid (conflict-checked per change)."""
    rng = random.Random(seed)
    nb = _conflicts(base.kind, base.t, base.N)
    ent = {v: c for v, c in base.entries.items()}
    if max(ent.values()) >= k:
        raise ValueError("base uses colors outside the fuzz range")
    keys = sorted(ent, key=lambda v: tuple(-1 if x is None else x for x in v))
    for _ in range(tries):
        v = rng.choice(keys)
        c = rng.randrange(k)
        if all(ent[w] != c for w in nb[v]):
            ent[v] = c
    return PathAlgorithmTable(base.kind, base.t, base.N, k, ent)


def random_zero_round(N: int, k: int, seed: int) -> PathAlgorithmTable:
    rng = random.Random(seed)
    return PathAlgorithmTable("node", 0, N, k, {(i,): rng.randrange(k) for i in range(1, N + 1)})


def build_corpus(seed: int = 0) -> list[PathAlgorithmTable]:
    """Valid tables with t <= 2, N <= 8, k <= 8: identity, greedy 3/4-colorings, and fuzzed variants."""
    out = []
    for N in (3, 5, 8):
        for t in (0, 1, 2):
            out.append(identity_table("node", t, N))
    for N in (4, 6, 8):
        for t in (1, 2):
            for k in (3, 4):
                tab = dsatur_table("node", t, N, k)
                if tab is not None:
                    out.append(tab)
    bases = [x for x in out if x.kind == "node" and x.t >= 1]
    for i, b in enumerate(bases[:8]):
        out.append(fuzz_table(b, min(8, max(b.k, 5)), seed + i))
    for N in (3, 4):
        out.append(dsatur_table("edge", 0, N, 8) or identity_table("edge", 0, N))
    return [x for x in out if x.k <= 8 or x.kind == "edge"]


def pipeline(tab: PathAlgorithmTable, steps: int) -> list[PathAlgorithmTable]:
    """Repeated elimination, asserting validity and range 2^k after every step."""
    chain = [tab]
    for _ in range(steps):
        cur = chain[-1]
        if cur.kind == "node" and cur.t == 0:
            break
        nxt = eliminate(cur)
        assert nxt.k == 1 << cur.k
        assert all(c < nxt.k for c in nxt.entries.values())
        assert verify_table(nxt).valid
        chain.append(nxt)
    return chain
