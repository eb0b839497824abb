"""Exact maximum independent set by component split, simplicial reduction and
branch-and-bound.

Graphs arrive as edge arrays.  Each connected component is solved on its own:
isolated vertices and cliques directly, everything else with a bitset search.
Simplicial vertices are always taken first; on chordal components
(interval-like closeness graphs) this alone finishes the search.  Otherwise
the search branches over the closed neighbourhood of a minimum-degree vertex,
which every maximal independent set meets, and prunes with a greedy clique
cover (the colouring bound of the complement).  On circular-arc-like graphs
each branch is left chordal.  Components whose neighbourhoods are cyclic
windows of consecutive indices with monotone ends (proper circular-arc
graphs, as produced by sorted grids on the circle) are solved exactly by a
window scan instead.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

_COVER_WINDOW = 16
_DENSE_ROW = 48


class SearchBudgetExceeded(Exception):
    def __init__(self, best: list[int]):
        super().__init__("node budget exhausted")
        self.best = best


@dataclass
class MisResult:
    vertices: list[int]
    exact: bool
    stats: dict = field(default_factory=dict)


def csr_adjacency(n_vertices: int, u: np.ndarray, v: np.ndarray):
    rows = np.concatenate([u, v]).astype(np.int64)
    cols = np.concatenate([v, u]).astype(np.int64)
    data = np.ones(len(rows), dtype=np.int8)
    return coo_matrix((data, (rows, cols)), shape=(n_vertices, n_vertices)).tocsr()


def _bits(x: int, nbytes: int) -> np.ndarray:
    if x == 0:
        return np.empty(0, dtype=np.int64)
    raw = np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little"))


def _row_mask(cols: np.ndarray, size: int, nbytes: int) -> int:
    if len(cols) < _DENSE_ROW:
        m = 0
        for c in cols.tolist():
            m |= 1 << c
        return m
    row = np.zeros(nbytes * 8, dtype=np.uint8)
    row[cols] = 1
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def _window_extents(indptr: np.ndarray, indices: np.ndarray, size: int):
    """Forward/backward extents if every closed neighbourhood is a cyclic
    window of consecutive local indices, else None.

    Row v must list exactly v+1..v+f and v-b..v-1 (mod size).
    """
    deg = np.diff(indptr)
    if len(indices) == 0 or (deg + 1 >= size).any():
        return None
    row = np.repeat(np.arange(size), deg)
    off = (indices - row) % size
    order = np.lexsort((off, row))
    off = off[order]
    rank = np.arange(len(off)) - np.repeat(indptr[:-1], deg) + 1
    fwd = off == rank
    f = np.bincount(row, weights=fwd, minlength=size).astype(np.int64)
    d = deg[row]
    bwd = off == size - d + rank - 1
    if not (fwd | bwd).all():
        return None
    return f, deg - f


def _window_mis(f: np.ndarray, b: np.ndarray, size: int) -> list[int] | None:
    """Exact MIS of a proper circular-arc graph given by window extents.

    Window ends and starts must both advance monotonically around the cycle.
    Any maximal independent set meets N[v]; once s in N[v] is taken the rest
    is a proper interval graph on the arc beyond N[s], where the leftmost
    greedy scan is optimal.
    """
    v = np.arange(size)
    end, start = v + f, v - b
    if (np.diff(end) < 0).any() or (np.diff(start) < 0).any():
        return None
    if end[0] + size < end[-1] or start[0] + size < start[-1]:
        return None
    fl = f.tolist()
    v0 = int(np.argmin(f + b))
    best: list[int] = []
    for s in range(v0 - int(b[v0]), v0 + int(f[v0]) + 1):
        s %= size
        picked = [s]
        u, stop = s + fl[s] + 1, s + size - int(b[s]) - 1
        while u <= stop:
            picked.append(u % size)
            u += fl[u % size] + 1
        if len(picked) > len(best):
            best = picked
    return sorted(best)


class _Component:
    """Bitset branch-and-bound on one connected component (local indices)."""

    def __init__(self, adj: list[int], size: int, counter: list[int], budget: int):
        self.adj = adj
        self.size = size
        self.nbytes = (size + 7) // 8
        self.counter = counter
        self.budget = budget
        self.best: list[int] = []

    def bits(self, x: int) -> np.ndarray:
        return _bits(x, self.nbytes)

    def is_clique(self, nbhd: int) -> bool:
        adj = self.adj
        # the extreme indices fail first on interval-like neighbourhoods
        hi = nbhd.bit_length() - 1
        if nbhd & ~(adj[hi] | (1 << hi)):
            return False
        rest = nbhd
        while rest:
            low = rest & -rest
            if nbhd & ~(adj[low.bit_length() - 1] | low):
                return False
            rest ^= low
        return True

    def reduce(self, P: int) -> tuple[int, list[int]]:
        """Take simplicial vertices until none is left."""
        adj = self.adj
        forced = []
        heap = [((adj[v] & P).bit_count(), v) for v in self.bits(P).tolist()]
        heapq.heapify(heap)
        while heap:
            d, v = heapq.heappop(heap)
            if not (P >> v) & 1:
                continue
            nbhd = adj[v] & P
            if nbhd.bit_count() != d:
                continue
            if d == 0 or self.is_clique(nbhd):
                forced.append(v)
                P &= ~(nbhd | (1 << v))
                touched = 0
                for u in self.bits(nbhd).tolist():
                    touched |= adj[u]
                touched &= P
                for w in self.bits(touched).tolist():
                    heapq.heappush(heap, ((adj[w] & P).bit_count(), w))
        return P, forced

    def cover(self, P: int, limit: int) -> int:
        """Greedy clique cover size of P (stops once it exceeds ``limit``)."""
        adj = self.adj
        commons: list[int] = []
        for v in self.bits(P).tolist():
            bit = 1 << v
            placed = False
            for k in range(len(commons) - 1, max(-1, len(commons) - 1 - _COVER_WINDOW), -1):
                if commons[k] & bit:
                    commons[k] &= adj[v]
                    placed = True
                    break
            if not placed:
                commons.append(adj[v] & P)
                if len(commons) > limit:
                    return len(commons)
        return len(commons)

    def pivot(self, P: int) -> int:
        """Vertex of minimum degree in P (fewest branches)."""
        adj = self.adj
        best_v, best_d = -1, None
        for v in self.bits(P).tolist():
            d = (adj[v] & P).bit_count()
            if best_d is None or d < best_d:
                best_v, best_d = v, d
        return best_v

    def greedy_completion(self, P: int, chosen: list[int]) -> list[int]:
        adj = self.adj
        out = list(chosen)
        for v in self.bits(P).tolist():
            if (P >> v) & 1:
                out.append(v)
                P &= ~(adj[v] | (1 << v))
        return out

    def solve(self) -> list[int]:
        full = (1 << self.size) - 1
        stack: list[tuple[int, list[int]]] = [(full, [])]
        try:
            while stack:
                P, chosen = stack.pop()
                self.counter[0] += 1
                if self.counter[0] > self.budget:
                    cand = self.greedy_completion(P, chosen)
                    if len(cand) > len(self.best):
                        self.best = cand
                    raise SearchBudgetExceeded(self.best)
                P, forced = self.reduce(P)
                chosen = chosen + forced
                if P == 0:
                    if len(chosen) > len(self.best):
                        self.best = chosen
                    continue
                room = len(self.best) - len(chosen)
                if self.cover(P, room) <= room:
                    continue
                # every maximal independent set meets N[v]: branch on which
                # vertex of N[v] is the first one taken
                v = self.pivot(P)
                ways = [v] + self.bits(self.adj[v] & P).tolist()
                children = []
                for w in ways:
                    children.append((P & ~(self.adj[w] | (1 << w)), chosen + [w]))
                    P &= ~(1 << w)
                stack.extend(reversed(children))
        except SearchBudgetExceeded:
            if not self.best:
                self.best = self.greedy_completion(full, [])
            raise
        return self.best


def maximum_independent_set(n_vertices: int, u: np.ndarray, v: np.ndarray,
                            node_budget: int) -> MisResult:
    """Maximum independent set of the graph with edges (u[k], v[k]).

    ``node_budget`` bounds the total number of branch-and-bound nodes over all
    components.  When it runs out the result is the best set found (made
    maximal greedily) with ``exact=False``.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    stats = {"components": 0, "trivial_components": 0, "window_components": 0, "nodes": 0}
    if n_vertices == 0:
        return MisResult([], True, stats)
    csr = csr_adjacency(n_vertices, u, v)
    n_comp, labels = connected_components(csr, directed=False)
    stats["components"] = int(n_comp)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    degree = np.diff(csr.indptr)

    chosen: list[int] = []
    counter = [0]
    exact = True
    pending: list[np.ndarray] = []
    for c in range(n_comp):
        members = order[bounds[c]:bounds[c + 1]]
        s = len(members)
        if s == 1 or int(degree[members].sum()) == s * (s - 1):
            chosen.append(int(members[0]))
            stats["trivial_components"] += 1
        else:
            pending.append(members)

    local = np.full(n_vertices, -1, dtype=np.int64)
    for members in pending:
        s = len(members)
        local[members] = np.arange(s)
        sub = csr[members]
        sub_idx = local[sub.indices]
        ext = _window_extents(sub.indptr, sub_idx, s)
        picked = _window_mis(ext[0], ext[1], s) if ext is not None else None
        if picked is not None:
            stats["window_components"] += 1
            chosen.extend(int(members[i]) for i in picked)
            continue
        nbytes = (s + 7) // 8
        adj = []
        for k in range(s):
            adj.append(_row_mask(sub_idx[sub.indptr[k]:sub.indptr[k + 1]], s, nbytes))
        comp = _Component(adj, s, counter, node_budget if exact else 0)
        if not exact:
            picked = comp.greedy_completion((1 << s) - 1, [])
        else:
            try:
                picked = comp.solve()
            except SearchBudgetExceeded as exc:
                picked = exc.best
                exact = False
        chosen.extend(int(members[i]) for i in picked)
    stats["nodes"] = counter[0]
    return MisResult(sorted(chosen), exact, stats)
