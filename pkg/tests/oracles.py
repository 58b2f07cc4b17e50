"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the code under test beyond plain data containers.
"""

from collections import deque
from fractions import Fraction
from itertools import combinations
import math


def degree_bruteforce(edges, v):
    """Double loop over hyperedges and their members."""
    nbrs = set()
    for e in edges:
        if v in e:
            for u in e:
                if u != v:
                    nbrs.add(u)
    return len(nbrs)


def hyperdegree_bruteforce(edges, v):
    return sum(1 for e in edges if v in e)


def mean_bf(xs):
    return math.fsum(xs) / len(xs)


def median_bf(xs):
    s = sorted(xs)
    n = len(s)
    return s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2


def mode_bf(xs):
    best = None
    for x in sorted(set(xs)):
        c = sum(1 for y in xs if y == x)
        if best is None or c > best[1]:
            best = (x, c)
    return best[0]


def variance_bf(xs):
    m = mean_bf(xs)
    return math.fsum((x - m) ** 2 for x in xs) / len(xs)


def mad_bf(xs):
    m = mean_bf(xs)
    return math.fsum(abs(x - m) for x in xs) / len(xs)


def gini_bf(xs):
    n = len(xs)
    m = mean_bf(xs)
    if m == 0:
        return 0.0
    num = math.fsum(abs(xs[i] - xs[j]) for i in range(n) for j in range(n) if i != j)
    return num / (2 * m * n * n)


def _shares(cats):
    n = len(cats)
    return [sum(1 for c in cats if c == k) / n for k in set(cats)]


def entropy_bf(cats):
    return -math.fsum(r * math.log(r) for r in _shares(cats))


def gini_impurity_bf(cats):
    return 1 - math.fsum(r * r for r in _shares(cats))


def purity_bf(cats):
    return max(sum(1 for c in cats if c == k) for k in set(cats)) / len(cats)


def cohesion_bf(xs, sim):
    """Ordered double sum divided by the number of ordered pairs."""
    n = len(xs)
    tot = math.fsum(sim(xs[i], xs[j]) for i in range(n) for j in range(n) if i != j)
    return tot / (n * (n - 1))


def interaction_potential_bf(edges, idx, denom="members"):
    e = set(edges[idx])
    nodes = set().union(*map(set, edges))
    ext = set()
    for v in nodes - e:
        for u in e:
            if any(u in f and v in f for j, f in enumerate(edges) if j != idx):
                ext.add(v)
                break
    if denom == "members":
        return len(ext) / len(e)
    return len(ext) / len(nodes - e)


def line_graph_bruteforce(edges, s=1):
    """All pairs of hyperedges compared member-by-member."""
    out = set()
    for i, j in combinations(range(len(edges)), 2):
        if len(set(edges[i]) & set(edges[j])) >= s:
            out.add((i, j))
    return out


def _bfs(adj, src):
    dist = {src: 0}
    sigma = {src: 1}
    q = deque([src])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def betweenness_bruteforce(n, edge_pairs):
    """Exact rational betweenness from all-pairs path counts.

    For each unordered pair {s, t} and each v outside it, v's share is
    sigma_sv * sigma_vt / sigma_st when d(s, v) + d(v, t) = d(s, t).
    """
    adj = {v: set() for v in range(n)}
    for a, b in edge_pairs:
        adj[a].add(b)
        adj[b].add(a)
    info = [_bfs(adj, s) for s in range(n)]
    bc = [Fraction(0)] * n
    for s, t in combinations(range(n), 2):
        ds, ss = info[s]
        if t not in ds:
            continue
        dt, st = info[t]
        for v in range(n):
            if v in (s, t) or v not in ds or v not in dt:
                continue
            if ds[v] + dt[v] == ds[t]:
                bc[v] += Fraction(ss[v] * st[v], ss[t])
    return bc
