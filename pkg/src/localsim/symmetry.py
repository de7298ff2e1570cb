"""Symmetry breaking: cover-free families, Linial coloring, bit reduction, greedy SLOCAL, Luby MIS,
and the randomized 3-coloring of oriented cycles."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ball import Ball
from .engine import (FunctionAlgorithm, LocalFunctionAlgorithm, MessageProtocol, RunResult,
                     SequentialAlgorithm)
from .errors import InvalidParameters, NoRedNodeError, TapeExhausted
from .graph import Graph, IdAssignment, RandomTape, power_graph, read_bits


# primes

def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    i = 3
    while i * i <= x:
        if x % i == 0:
            return False
        i += 2
    return True


def next_prime_above(x: int) -> int:
    """Smallest prime strictly greater than x."""
    p = x + 1
    while not is_prime(p):
        p += 1
    return p


# cover-free families

@dataclass(frozen=True)
class CoverFreeFamily:
    """k sets over the ground set {1..ground}; no set is covered by the union of delta others.

    ``polynomial``: index i <-> polynomial over F_q whose coefficients are the
    base-q digits of i-1 (d+1 digits, lowest degree first); its set is
    {x*q + p(x) + 1 : x in F_q}. ``explicit``: S_i = {i}.
    """

    k: int
    ground: int
    delta: int
    construction: str
    d: int = 0
    q: int = 0

    def coefficients(self, i: int) -> list[int]:
        x = i - 1
        out = []
        for _ in range(self.d + 1):
            x, r = divmod(x, self.q)
            out.append(r)
        return out

    def poly_values(self, i: int) -> list[int]:
        coef = self.coefficients(i)
        vals = []
        for x in range(self.q):
            acc = 0
            for a in reversed(coef):
                acc = (acc * x + a) % self.q
            vals.append(acc)
        return vals

    def set_of(self, i: int) -> frozenset:
        if not (1 <= i <= self.k):
            raise IndexError(f"set index {i} outside 1..{self.k}")
        if self.construction == "explicit":
            return frozenset((i,))
        return frozenset(x * self.q + y + 1 for x, y in enumerate(self.poly_values(i)))

    def mask_of(self, i: int) -> int:
        m = 0
        for e in self.set_of(i):
            m |= 1 << (e - 1)
        return m

    @property
    def sets(self) -> list[frozenset]:
        return [self.set_of(i) for i in range(1, self.k + 1)]


def _poly_params(k: int, delta: int, d: int | None = None, q: int | None = None):
    """(d, q) with q prime, q > delta*d, q^(d+1) >= k, minimizing q."""
    if d is not None and q is not None:
        if not is_prime(q) or q <= delta * d or q ** (d + 1) < k:
            raise InvalidParameters(f"(d={d}, q={q}) does not give a {delta}-cover-free family of size {k}")
        return d, q
    best = None
    ds = [d] if d is not None else range(1, max(2, k.bit_length() + 1))
    for dd in ds:
        qq = next_prime_above(delta * dd)
        if qq ** (dd + 1) < k:
            # smallest q with q^(d+1) >= k, then the next prime at or above it
            lo = _iroot_ceil(k, dd + 1)
            qq = max(qq, lo if is_prime(lo) else next_prime_above(lo))
        if best is None or qq < best[1]:
            best = (dd, qq)
    return best


def _iroot_ceil(k: int, e: int) -> int:
    lo, hi = 1, 1
    while hi ** e < k:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** e >= k:
            hi = mid
        else:
            lo = mid + 1
    return lo


@lru_cache(maxsize=None)
def coverfree_family(k: int, delta: int, d: int | None = None, q: int | None = None) -> CoverFreeFamily:
    """A delta-cover-free family of k sets (explicit singletons when that ground set is no larger)."""
    if k < 1 or delta < 1:
        raise InvalidParameters("need k >= 1 and delta >= 1")
    dd, qq = _poly_params(k, delta, d, q)
    if d is None and q is None and k <= qq * qq:
        return CoverFreeFamily(k, k, delta, "explicit")
    return CoverFreeFamily(k, qq * qq, delta, "polynomial", dd, qq)


def verify_cover_free(fam: CoverFreeFamily) -> tuple | None:
    """Exhaustive check; returns a covering tuple (i0, others) if one exists, else None."""
    masks = [fam.mask_of(i) for i in range(1, fam.k + 1)]
    idx = range(fam.k)
    for i0 in idx:
        rest = [j for j in idx if j != i0]
        for combo in itertools.combinations(rest, min(fam.delta, len(rest))):
            u = 0
            for j in combo:
                u |= masks[j]
            if masks[i0] & ~u == 0:
                return (i0 + 1, tuple(j + 1 for j in combo))
    return None


def spot_check_cover_free(fam: CoverFreeFamily, trials: int, seed: int = 0) -> tuple | None:
    rng = random.Random(seed)
    for _ in range(trials):
        picks = rng.sample(range(1, fam.k + 1), min(fam.delta + 1, fam.k))
        s0 = fam.set_of(picks[0])
        u = set()
        for j in picks[1:]:
            u |= fam.set_of(j)
        if not (s0 - u):
            return (picks[0], tuple(picks[1:]))
    return None


# Linial color reduction

def linial_next_range(k: int, delta: int) -> int:
    return coverfree_family(k, delta).ground


def linial_ladder(k: int, delta: int) -> list[int]:
    """Color-range sequence k0 > k1 > ... ; stops once the bound stops shrinking."""
    ladder = [k]
    if delta < 1:
        return ladder
    while True:
        nxt = linial_next_range(ladder[-1], delta)
        if nxt >= ladder[-1]:
            return ladder
        ladder.append(nxt)


def reduce_color(fam: CoverFreeFamily, own: int, others) -> int:
    """Smallest element of S_own outside the union of the others' sets."""
    if fam.construction == "explicit":
        return own
    q = fam.q
    mine = fam.poly_values(own)
    taken = [set() for _ in range(q)]
    for c in others:
        for x, y in enumerate(fam.poly_values(c)):
            taken[x].add(y)
    for x in range(q):
        if mine[x] not in taken[x]:
            return x * q + mine[x] + 1
    raise AssertionError("cover-free property failed")


def linial_reduce_once(g: Graph, coloring, k: int, delta: int | None = None, check: bool = False):
    """One round: proper k-coloring -> proper coloring with linial_next_range(k, delta) colors."""
    dl = g.max_degree if delta is None else delta
    if check:
        for u in range(g.n):
            for v in g.adj[u]:
                if coloring[u] == coloring[v]:
                    raise ValueError("input coloring is not proper")
    if dl < 1:
        return [1] * g.n, 1
    fam = coverfree_family(k, dl)
    if fam.construction == "polynomial" and k < (1 << 62):
        return _reduce_numpy(g, coloring, fam), fam.ground
    return [reduce_color(fam, coloring[u], [coloring[v] for v in g.adj[u]]) for u in range(g.n)], fam.ground


def _neighbor_matrix(g: Graph):
    D = max(g.max_degree, 1)
    nb = np.full((g.n, D), -1, dtype=np.int64)
    for u in range(g.n):
        a = g.adj[u]
        nb[u, :len(a)] = a
    return nb


def _reduce_numpy(g: Graph, coloring, fam: CoverFreeFamily, nb=None):
    q, d = fam.q, fam.d
    cols = np.asarray(coloring, dtype=np.int64) - 1
    digits = []
    x = cols.copy()
    for _ in range(d + 1):
        digits.append(x % q)
        x //= q
    xs = np.arange(q, dtype=np.int64)
    vals = np.zeros((g.n, q), dtype=np.int64)
    for a in reversed(digits):
        vals = (vals * xs[None, :] + a[:, None]) % q
    if nb is None:
        nb = _neighbor_matrix(g)
    clash = np.zeros((g.n, q), dtype=bool)
    for j in range(nb.shape[1]):
        col = nb[:, j]
        has = col >= 0
        clash[has] |= vals[col[has]] == vals[has]
    free = ~clash
    if not free.any(axis=1).all():
        raise AssertionError("cover-free property failed")
    first = free.argmax(axis=1)
    chosen = vals[np.arange(g.n), first]
    return (first * q + chosen + 1).tolist()


def _ids_and_range(ids):
    if isinstance(ids, IdAssignment):
        return list(ids.ids), ids.range_bound
    ids = list(ids)
    return ids, (max(ids) + 1 if ids else 1)


def linial_color(g: Graph, ids, delta: int | None = None) -> RunResult:
    """Iterate the one-round reduction from ids (colors 1..s-1) down the ladder."""
    idl, s = _ids_and_range(ids)
    dl = g.max_degree if delta is None else delta
    if dl < 1:
        return RunResult([1] * g.n, 0, 0, "linial", g.n, extra={"ladder": [max(s - 1, 1), 1], "range": 1})
    ladder = linial_ladder(max(s - 1, 1), dl)
    colors = idl
    for k in ladder[:-1]:
        colors, _ = linial_reduce_once(g, colors, k, dl)
    return RunResult(colors, len(ladder) - 1, len(ladder) - 1, "linial", g.n,
                     extra={"ladder": ladder, "range": ladder[-1]})


class LinialProtocol(MessageProtocol):
    """Message-passing Linial reduction; the ladder is fixed by (id range s, delta)."""

    name = "linial"

    def __init__(self, s: int, delta: int):
        self.s = s
        self.delta = delta
        self.ladder = linial_ladder(max(s - 1, 1), delta) if delta >= 1 else [max(s - 1, 1)]

    def round_budget(self, n):
        return len(self.ladder) - 1

    def init(self, n, degree, label):
        return {"c": label, "r": 0}, label

    def step(self, state, inbox, ports):
        k = self.ladder[state["r"]]
        fam = coverfree_family(k, self.delta)
        c = reduce_color(fam, state["c"], [m for m in inbox if m is not None])
        state = {"c": c, "r": state["r"] + 1}
        return state, [c] * len(inbox)

    def finalize(self, state):
        return state["c"]


def max_color_ratio(delta: int, s: int) -> float:
    ladder = linial_ladder(max(s - 1, 1), delta)
    return ladder[-1] / delta ** 2


LINIAL_C0 = 16  # final range <= nextprime(2*delta)^2 < 16 delta^2 (Bertrand)


# bit reduction

def _ceil_log2(x: int) -> int:
    return max(0, (x - 1).bit_length())


def cole_style_reduce(g: Graph, coloring, k: int, delta: int | None = None):
    """Colors are k-bit strings (index 0 = most significant bit).

    Node u records, for each neighbor v, the first index j where its string
    differs from v's together with its own bit at j. The records are sorted
    and padded to delta fields by repeating the last one, so the result does
    not depend on port order. Returns (new colors, new bit length).
    """
    dl = g.max_degree if delta is None else delta
    dl = max(dl, 1)
    jw = _ceil_log2(k)
    w = jw + 1

    def bit(c, j):
        return (c >> (k - 1 - j)) & 1

    out = []
    for u in range(g.n):
        cu = coloring[u]
        fields = set()
        for v in g.adj[u]:
            x = cu ^ coloring[v]
            if x == 0:
                raise ValueError(f"neighbors {u} and {v} share color {cu}")
            j = k - x.bit_length()
            fields.add((j, bit(cu, j)))
        fields = sorted(fields) or [(0, bit(cu, 0))]
        fields += [fields[-1]] * (dl - len(fields))
        code = 0
        for j, b in fields:
            code = (code << w) | (j << 1) | b
        out.append(code)
    return out, dl * w


class ColeStepProtocol(MessageProtocol):
    name = "cole_step"

    def __init__(self, k: int, delta: int):
        self.k = k
        self.delta = delta

    def round_budget(self, n):
        return 1

    def init(self, n, degree, label):
        return {"c": label}, label

    def step(self, state, inbox, ports):
        k, dl = self.k, max(self.delta, 1)
        cu = state["c"]
        w = _ceil_log2(k) + 1
        fields = set()
        for m in inbox:
            j = k - (cu ^ m).bit_length()
            fields.add((j, (cu >> (k - 1 - j)) & 1))
        fields = sorted(fields) or [(0, (cu >> (k - 1)) & 1)]
        fields += [fields[-1]] * (dl - len(fields))
        code = 0
        for j, b in fields:
            code = (code << w) | (j << 1) | b
        return {"c": code}, [None] * len(inbox)

    def finalize(self, state):
        return state["c"]


# greedy sequential algorithms

def _processed_outputs(b: Ball):
    return [b.labels[j][1][0] for j in b.neighbors(0) if b.labels[j][1] is not None]


def greedy_mis_slocal() -> SequentialAlgorithm:
    def apply(n, b):
        return (0 if 1 in _processed_outputs(b) else 1), None
    return SequentialAlgorithm(1, apply, "greedy_mis")


def greedy_coloring_slocal() -> SequentialAlgorithm:
    def apply(n, b):
        used = set(_processed_outputs(b))
        c = 1
        while c in used:
            c += 1
        return c, None
    return SequentialAlgorithm(1, apply, "greedy_coloring")


# Luby


def luby_mis(g: Graph, tape: RandomTape, ids=None, w: int = 64) -> RunResult:
    """Luby's MIS: each active node draws a w-bit word per iteration; strict local maxima join.

    Ties between equal words are broken by id when ids are given; without ids
    neither tied node joins that iteration.
    """
    idl = list(ids.ids) if isinstance(ids, IdAssignment) else (list(ids) if ids is not None else None)
    active = set(range(g.n))
    status = [None] * g.n
    it = 0
    while active:
        words = {u: read_bits(tape[u], tape.budget, it * w, w) for u in active}
        joined = []
        for u in active:
            mine = (words[u], idl[u] if idl else None)
            ok = True
            for v in g.adj[u]:
                if v in active:
                    other = (words[v], idl[v] if idl else None)
                    if idl is None:
                        if other[0] >= mine[0]:
                            ok = False
                            break
                    elif other > mine:
                        ok = False
                        break
            if ok:
                joined.append(u)
        for u in joined:
            status[u] = 1
        removed = set(joined)
        for u in joined:
            for v in g.adj[u]:
                if v in active and status[v] is None:
                    status[v] = 0
                    removed.add(v)
        active -= removed
        it += 1
    return RunResult(status, it, 2 * it, "luby", g.n, extra={"iterations": it, "message_rounds": 2 * it})


class LubyProtocol(MessageProtocol):
    """Two message rounds per iteration (words, then join flags). Labels: tape block or (id, block)."""

    name = "luby"

    def __init__(self, budget: int, w: int = 64, use_ids: bool = False, iterations: int | None = None):
        self.budget = budget
        self.w = w
        self.use_ids = use_ids
        self.iterations = iterations if iterations is not None else budget // w

    def round_budget(self, n):
        return 2 * self.iterations

    def _word(self, st):
        if (st["it"] + 1) * self.w > self.budget:
            return None
        return read_bits(st["block"], self.budget, st["it"] * self.w, self.w)

    def init(self, n, degree, label):
        ident, block = label if self.use_ids else (None, label)
        st = {"block": block, "id": ident, "status": None, "it": 0, "phase": 0, "word": None}
        st["word"] = self._word(st)
        return st, self._announce(st)

    def _announce(self, st):
        if st["status"] is None and st["word"] is not None:
            return (st["word"], st["id"])
        return None

    def step(self, state, inbox, ports):
        st = dict(state)
        deg = len(inbox)
        if st["phase"] == 0:
            if st["status"] is None and st["word"] is not None:
                mine = (st["word"], st["id"])
                ok = True
                for m in inbox:
                    if m is None:
                        continue
                    if not self.use_ids:
                        if m[0] >= mine[0]:
                            ok = False
                    elif m > mine:
                        ok = False
                if ok:
                    st["status"] = 1
                    st["phase"] = 1
                    return st, ["joined"] * deg
            st["phase"] = 1
            return st, [None] * deg
        if st["status"] is None and any(m == "joined" for m in inbox):
            st["status"] = 0
        st["phase"] = 0
        st["it"] += 1
        st["word"] = self._word(st) if st["status"] is None else None
        a = self._announce(st)
        return st, [a] * deg

    def finalize(self, state):
        return state["status"]


# randomized 3-coloring of oriented cycles

RED = 3


def _red_flags(g: Graph, tape: RandomTape, attempt: int):
    bits = [read_bits(tape[u], tape.budget, attempt, 1) for u in range(g.n)]
    red = []
    for u in range(g.n):
        p, s = g.predecessor(u), g.successor(u)
        red.append(bits[u] == 1 and bits[p] == 0 and bits[s] == 0)
    return red


def _check_oriented_cycle(g: Graph):
    if not g.oriented or g.n < 3 or any(g.degree(u) != 2 for u in range(g.n)):
        raise InvalidParameters("graph must be an oriented cycle")
    for u in range(g.n):
        if g.successor(u) is None or g.predecessor(u) is None:
            raise InvalidParameters("graph must be an oriented cycle")


def cycle_3color_randomized(g: Graph, tape: RandomTape, attempts: int = 1) -> RunResult:
    """Phase 1: a node whose bit is 1 while both neighbors' bits are 0 turns red (color 3).
    Phase 2: other nodes count hops back to the nearest red predecessor and alternate 1, 2.

    Attempt a uses bit a of every tape; the first attempt with a red node anywhere is used.
    """
    _check_oriented_cycle(g)
    if attempts > tape.budget:
        raise TapeExhausted(f"{attempts} attempts need {attempts} bits per node, budget is {tape.budget}")
    for a in range(attempts):
        red = _red_flags(g, tape, a)
        if any(red):
            break
    else:
        raise NoRedNodeError(f"no red node in {attempts} attempt(s)")
    start = red.index(True)
    colors = [0] * g.n
    u, hops, longest = start, 0, 0
    for _ in range(g.n):
        if red[u]:
            colors[u] = RED
            hops = 0
        else:
            hops += 1
            colors[u] = 1 if hops % 2 else 2
            longest = max(longest, hops)
        u = g.successor(u)
    return RunResult(colors, 1 + longest, 1 + longest, "cycle3color", g.n,
                     extra={"attempt": a, "longest_run": longest, "reds": sum(red)})


def red_free_windows(g: Graph, tape: RandomTape, length: int, samples: int, seed: int = 0) -> float:
    """Fraction of sampled length-``length`` arcs of the cycle containing no red node (attempt 0)."""
    red = _red_flags(g, tape, 0)
    order = [0] * g.n
    u = 0
    for i in range(g.n):
        order[i] = u
        u = g.successor(u)
    rng = random.Random(seed)
    bad = 0
    for _ in range(samples):
        s = rng.randrange(g.n)
        if not any(red[order[(s + i) % g.n]] for i in range(length)):
            bad += 1
    return bad / samples


def _arc_maps(b: Ball):
    pred, succ = {}, {}
    for (a, c), fwd in (b.arcs or {}).items():
        tail, head = (a, c) if fwd else (c, a)
        pred[head] = tail
        succ[tail] = head
    return pred, succ


class Cycle3ColorLocal(LocalFunctionAlgorithm):
    """Function view of the cycle algorithm with ``attempts`` bits per node (ball labels = tape blocks).

    With ``window=None`` the view covers the whole cycle (radius ceil(n/2)) and the
    output matches cycle_3color_randomized. With a finite window W a node only scans
    W-1 hops back (radius W); nodes seeing no red output 1.
    """

    def __init__(self, attempts: int = 1, window: int | None = None):
        self.attempts = attempts
        self.window = window
        self.name = "cycle3color_local" if window is None else f"cycle3color_w{window}"

    def radius(self, n):
        return (n + 1) // 2 if self.window is None else self.window

    def scan_length(self, n):
        return n - 1 if self.window is None else self.window - 1

    def evaluate(self, n, b: Ball):
        pred, succ = _arc_maps(b)
        L = self.scan_length(n)
        chain = [0]
        while len(chain) <= L and chain[-1] in pred:
            chain.append(pred[chain[-1]])
        B = self.attempts
        for a in range(B):
            def bit(i):
                return (b.labels[i] >> (B - 1 - a)) & 1
            for i, x in enumerate(chain):
                if x not in pred or x not in succ:
                    break
                if bit(x) == 1 and bit(pred[x]) == 0 and bit(succ[x]) == 0:
                    if i == 0:
                        return RED
                    return 1 if i % 2 else 2
        return 1


# distance coloring

def distance_coloring(g: Graph, rho: int, ids) -> RunResult:
    """Linial coloring of the power graph G^rho; each of its rounds costs rho rounds in G."""
    pg = power_graph(g, rho) if rho > 1 else g
    res = linial_color(pg, ids)
    res.algorithm = f"distance_coloring({rho})"
    res.rounds = res.rounds * rho
    res.locality_used = res.rounds
    res.extra["power_rounds"] = res.rounds // rho if rho else 0
    return res


# Cole-Vishkin on oriented cycles (used as the hand-written small-size algorithm)

def cv_schedule(s: int) -> list[int]:
    """Exclusive color bounds visited by Cole-Vishkin reduction from ids below s.

    One step maps colors below M (bit length k) to 2*j + bit with j < k, so
    the next bound is 2k; stop once colors are below 6.
    """
    ms = [max(s, 2)]
    while ms[-1] > 6:
        k = (ms[-1] - 1).bit_length()
        ms.append(2 * k)
    return ms


class ColeVishkinCycle(LocalFunctionAlgorithm):
    """Deterministic 3-coloring of oriented cycles: CV bit reduction to < 6 colors, then 3 recolor rounds.

    Labels are ids from [1, s) with s = n^C. Radius t(n) = (#CV iterations) + 3.
    """

    name = "cole_vishkin_cycle"

    def __init__(self, exponent: int = 3):
        self.exponent = exponent

    def s(self, n):
        return max(n ** self.exponent, n + 1)

    def iterations(self, n):
        return len(cv_schedule(self.s(n))) - 1

    def radius(self, n):
        return self.iterations(n) + 3

    def evaluate(self, n, b: Ball):
        pred, succ = _arc_maps(b)
        it = self.iterations(n)
        back, fwd = [], []
        x = 0
        for _ in range(3):
            x = pred[x]
            back.append(x)
        x = 0
        for _ in range(it + 3):
            x = succ[x]
            fwd.append(x)
        seq = list(reversed(back)) + [0] + fwd
        cols = [b.labels[i] for i in seq]
        ks = cv_schedule(self.s(n))
        for k in ks[:-1]:
            nxt = []
            for i in range(len(cols) - 1):
                diff = cols[i] ^ cols[i + 1]
                j = (diff & -diff).bit_length() - 1
                nxt.append(2 * j + ((cols[i] >> j) & 1))
            cols = nxt
        for c in (5, 4, 3):
            nxt = []
            for i in range(1, len(cols) - 1):
                if cols[i] == c:
                    used = {cols[i - 1], cols[i + 1]}
                    nxt.append(min(x for x in (0, 1, 2) if x not in used))
                else:
                    nxt.append(cols[i])
            cols = nxt
        # the center sits at position 0 of what is left after trimming three on the left
        return cols[0] + 1
