"""Bipartite matching helpers for tolerance-aware multiset comparison.

Two separate concerns, two algorithms:

* feasibility ("does a perfect assignment exist with every pair within
  tol?") is a bottleneck question — Hopcroft-Karp on the threshold graph,
  with exact multiprecision distance comparisons;
* the reported assignment cost is min-sum — a small O(n^3) Hungarian
  solver on float distances (diagnostic only, so double precision is fine).
"""

from __future__ import annotations

from collections import deque

INF = float("inf")


def hopcroft_karp(adj: list[list[int]], n_left: int, n_right: int) -> tuple[int, list[int]]:
    """Maximum bipartite matching. Returns (size, match_left) with -1 for unmatched."""
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = -1
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = -1
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size, match_l


def hungarian(cost: list[list[float]]) -> tuple[float, list[int]]:
    """Min-sum assignment on a square float matrix (JV-style shortest augmenting paths)."""
    n = len(cost)
    if n == 0:
        return 0.0, []
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j] = row matched to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assign = [0] * n
    total = 0.0
    for j in range(1, n + 1):
        if p[j]:
            assign[p[j] - 1] = j - 1
            total += cost[p[j] - 1][j - 1]
    return total, assign
