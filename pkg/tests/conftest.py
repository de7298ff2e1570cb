import itertools
from collections import deque

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def all_pairs_distances(n, edges):
    """Plain BFS from every node over an edge list; independent of Graph.bfs."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    out = []
    for s in range(n):
        d = {s: 0}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in d:
                    d[y] = d[x] + 1
                    q.append(y)
        out.append(d)
    return out


@pytest.fixture
def dist_oracle():
    return all_pairs_distances


def brute_mis_sets(n, edges):
    adj = {(u, v) for u, v in edges} | {(v, u) for u, v in edges}
    out = []
    for r in range(n + 1):
        for s in itertools.combinations(range(n), r):
            ss = set(s)
            indep = not any((a, b) in adj for a in ss for b in ss)
            maximal = all(v in ss or any((v, w) in adj for w in ss) for v in range(n))
            if indep and maximal:
                out.append(ss)
    return out


# acceptance summary: tests/test_acceptance.py records one line per criterion here
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
