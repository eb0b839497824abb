"""Maximum bipartite matching (Hopcroft-Karp) and Hall-violator extraction."""
from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

_INF = 1 << 60


def hopcroft_karp(n_left: int, n_right: int, adj: Sequence[Sequence[int]]):
    """Maximum matching of a bipartite graph given by left-to-right adjacency.

    Returns ``(match_left, match_right)``; unmatched entries are -1.  The scan
    order is the order of ``adj`` so results are deterministic.
    """
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    adj = [list(a) for a in adj]

    # cheap greedy start
    for u in range(n_left):
        for v in adj[u]:
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break

    dist = [0] * n_left
    while True:
        # layered BFS from free left vertices
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = _INF
        while queue:
            u = queue.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = min(found, dist[u] + 1)
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if found == _INF:
            break

        # vertex-disjoint shortest augmenting paths, iterative DFS
        ptr = [0] * n_left
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            stack = [root]
            while stack:
                u = stack[-1]
                advanced = False
                while ptr[u] < len(adj[u]):
                    v = adj[u][ptr[u]]
                    ptr[u] += 1
                    w = match_r[v]
                    if w == -1:
                        if dist[u] + 1 != found:
                            continue
                        # augment along the stack
                        for depth in range(len(stack) - 1, -1, -1):
                            x = stack[depth]
                            nxt = match_l[x]
                            match_l[x] = v
                            match_r[v] = x
                            v = nxt
                        stack = []
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        stack.append(int(w))
                        advanced = True
                        break
                if not stack:
                    break
                if not advanced:
                    dist[u] = _INF
                    stack.pop()
    return match_l, match_r


def hall_violator(n_left: int, adj: Sequence[Sequence[int]], match_l, match_r):
    """Left set S with |N(S)| < |S|, from a maximum matching that is not left-saturating.

    Alternating BFS from the free left vertices; every right vertex reached is
    matched (maximality), so |N(S)| = |S| - #free.  Returns (S, N(S)) sorted,
    or None when the matching saturates the left side.
    """
    free = [u for u in range(n_left) if match_l[u] == -1]
    if not free:
        return None
    seen_l = set(free)
    seen_r = set()
    queue = deque(free)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in seen_r:
                continue
            seen_r.add(v)
            w = int(match_r[v])
            if w != -1 and w not in seen_l:
                seen_l.add(w)
                queue.append(w)
    return sorted(seen_l), sorted(seen_r)
