"""Independent reference computations used as test oracles.

Nothing here imports the package's computational code; everything is plain
Python loops over lists.
"""

import itertools
import math


def floyd_warshall(n, edges):
    d = [[0.0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for u, v, w in edges:
        d[u][v] = d[v][u] = min(d[u][v], w)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def connected(n, edges):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, *_ in edges:
        parent[find(u)] = find(v)
    return len({find(i) for i in range(n)}) == 1


def lip(dist_src, dist_tgt, assignment):
    """Lipschitz constant of {point: target index} over a finite target."""
    pts = sorted(assignment)
    best = 0.0
    for a, b in itertools.combinations(pts, 2):
        best = max(best, dist_tgt[assignment[a]][assignment[b]] / dist_src[a][b])
    return best


def best_extension(dist_src, dist_tgt, phi, to):
    """Least constant over all extensions of phi (dict) to the points ``to``."""
    free = [p for p in sorted(to) if p not in phi]
    q = len(dist_tgt)
    best, arg = math.inf, None
    for vals in itertools.product(range(q), repeat=len(free)):
        a = dict(phi)
        a.update(zip(free, vals))
        c = lip(dist_src, dist_tgt, a)
        if c < best:
            best, arg = c, vals
    return best, arg


def modulus(dist_src, dist_tgt, S, within):
    """e(within, S; N) by double enumeration; constant maps count as 1."""
    q = len(dist_tgt)
    worst = 1.0
    for vals in itertools.product(range(q), repeat=len(S)):
        phi = dict(zip(S, vals))
        L = lip(dist_src, dist_tgt, phi)
        if L == 0:
            continue
        worst = max(worst, best_extension(dist_src, dist_tgt, phi, within)[0] / L)
    return worst


def e_lower(dist_src, dist_tgt, n):
    pts = range(len(dist_src))
    return max(modulus(dist_src, dist_tgt, list(S), list(pts))
               for k in range(1, n + 1) for S in itertools.combinations(pts, k))


def e_upper(dist_src, dist_tgt, n):
    pts = list(range(len(dist_src)))
    worst = 1.0
    for k in range(1, len(pts)):
        for S in itertools.combinations(pts, k):
            rest = [p for p in pts if p not in S]
            for j in range(1, min(n, len(rest)) + 1):
                for X in itertools.combinations(rest, j):
                    worst = max(worst, modulus(dist_src, dist_tgt, list(S), sorted(S + X)))
    return worst


def golden_section(f, a, b, iters=200):
    g = (math.sqrt(5) - 1) / 2
    for _ in range(iters):
        c, d = b - g * (b - a), a + g * (b - a)
        if f(c) < f(d):
            b = d
        else:
            a = c
    x = (a + b) / 2
    return x, f(x)


def unit_simplex(k):
    return [[0.0 if i == j else 1.0 for j in range(k)] for i in range(k)]


def unit_path(m):
    return [[float(abs(i - j)) for j in range(m + 1)] for i in range(m + 1)]
