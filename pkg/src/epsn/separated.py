"""Closeness graphs, maximal / maximum (eps, n)-separated sets, and the
injection between separated sets given by Hall's marriage condition."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bowen import OrbitTable, PairTimes, bowen_distance_array, orbit_table, pair_times
from .errors import BudgetExceeded, MismatchedParameters, SingularOrbit
from .matching import hall_violator, hopcroft_karp
from .mis import csr_adjacency, maximum_independent_set
from .systems import CandidateSet, Sft, System, prefix_groups_pairs

MAXIMAL_GREEDY = "maximal-greedy"
MAXIMUM_EXACT = "maximum-exact"
CLOSED_FORM = "closed-form"
OPTIMAL_STATUSES = (MAXIMUM_EXACT, CLOSED_FORM)


@dataclass(eq=False)
class ClosenessGraph:
    """Vertices are candidates; {u, v} is an edge iff d_n(u, v) < eps.

    Independent sets are exactly the (eps, n)-separated subsets.  ``vertex_ids``
    maps vertices back to candidate indices (candidates whose orbits meet S
    are dropped).
    """

    n_vertices: int
    u: np.ndarray
    v: np.ndarray
    eps: float
    n: int
    vertex_ids: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.u)

    def csr(self):
        return csr_adjacency(self.n_vertices, self.u, self.v)

    def neighbors(self, x: int) -> np.ndarray:
        csr = self.csr()
        return csr.indices[csr.indptr[x]:csr.indptr[x + 1]]

    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    @classmethod
    def from_edges(cls, n_vertices: int, edges, eps: float = float("nan"), n: int = 1):
        e = np.array(sorted({(min(a, b), max(a, b)) for a, b in edges if a != b}),
                     dtype=np.int64).reshape(-1, 2)
        return cls(n_vertices, e[:, 0], e[:, 1], eps, n, np.arange(n_vertices))

    @classmethod
    def from_distance_matrix(cls, dist, eps: float, n: int = 1):
        """Graph of an explicit finite metric space: edge iff distance < eps."""
        d = np.asarray(dist, dtype=float)
        i, j = np.triu_indices(len(d), 1)
        close = d[i, j] < eps
        return cls(len(d), i[close], j[close], eps, n, np.arange(len(d)))


@dataclass(eq=False)
class SeparatedSet:
    system: System | None
    points: np.ndarray
    eps: float
    n: int
    status: str
    certificate: dict = field(default_factory=dict)
    indices: np.ndarray | None = None

    def __len__(self) -> int:
        # sets on an abstract graph carry vertex indices only
        return len(self.points) if self.points is not None else len(self.indices)

    @property
    def is_optimal(self) -> bool:
        return self.status in OPTIMAL_STATUSES

    def as_points(self):
        return self.system.from_array(self.points)


def closeness_graph(sys: System, cands: CandidateSet, eps: float, n: int, *,
                    table: OrbitTable | None = None,
                    times: PairTimes | None = None) -> ClosenessGraph:
    """Closeness graph of the candidates at (eps, n).

    ``table``/``times`` may be shared across several n (computed once for
    n_max >= n); without them they are built here.
    """
    if table is None:
        table = orbit_table(sys, cands, n)
    valid = table.valid(n)
    ids = np.flatnonzero(valid)
    remap = np.full(len(valid), -1, dtype=np.int64)
    remap[ids] = np.arange(len(ids))

    if times is None and isinstance(sys, Sft):
        # d_n < eps iff the words share their first n - 1 + t symbols
        t = min(n - 1 + Sft.prefix_length(eps), cands.points.shape[1])
        i, j = prefix_groups_pairs(cands.points, t)
    else:
        if times is None:
            times = pair_times(table, eps, n_min=n)
        if times.eps != eps or times.strict or not times.n_min <= n <= times.n_max:
            raise MismatchedParameters("pair times were computed for different parameters")
        keep = times.tau >= n
        i, j = times.i[keep], times.j[keep]
    ok = valid[i] & valid[j]
    return ClosenessGraph(len(ids), remap[i[ok]], remap[j[ok]], eps, n, ids)


def _set_from_vertices(sys, cands, g, verts, status, certificate):
    idx = g.vertex_ids[np.asarray(verts, dtype=np.int64)] if len(verts) else np.empty(0, dtype=np.int64)
    pts = cands.points[idx] if cands is not None else None
    return SeparatedSet(sys, pts, g.eps, g.n, status, certificate, idx)


def greedy_maximal(g: ClosenessGraph, order=None, *, sys: System | None = None,
                   cands: CandidateSet | None = None) -> SeparatedSet:
    """Maximal independent set from a single scan of ``order`` (default: by index)."""
    label = "index" if order is None else "custom"
    order = np.arange(g.n_vertices) if order is None else np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(g.n_vertices)):
        raise ValueError("order must be a permutation of the vertices")
    csr = g.csr()
    blocked = np.zeros(g.n_vertices, dtype=bool)
    chosen = []
    for x in order.tolist():
        if blocked[x]:
            continue
        chosen.append(x)
        blocked[x] = True
        blocked[csr.indices[csr.indptr[x]:csr.indptr[x + 1]]] = True
    return _set_from_vertices(sys, cands, g, sorted(chosen), MAXIMAL_GREEDY,
                              {"order": label})


def exact_maximum(g: ClosenessGraph, node_budget: int = 1_000_000, *,
                  sys: System | None = None, cands: CandidateSet | None = None) -> SeparatedSet:
    """Maximum independent set; raises BudgetExceeded (with the incumbent) if unproven."""
    if node_budget < 1:
        raise ValueError("node_budget must be >= 1")
    res = maximum_independent_set(g.n_vertices, g.u, g.v, node_budget)
    status = MAXIMUM_EXACT if res.exact else MAXIMAL_GREEDY
    s = _set_from_vertices(sys, cands, g, res.vertices, status, dict(res.stats))
    if not res.exact:
        raise BudgetExceeded(f"branch-and-bound exceeded {node_budget} nodes", incumbent=s)
    return s


def separation_violations(sys: System, points: np.ndarray, eps: float, n: int,
                          exclusion_radius: float = 0.0):
    """Index pairs of ``points`` with d_n < eps (empty iff the set is separated)."""
    table = orbit_table(sys, points, n, exclusion_radius)
    if not table.valid(n).all():
        bad = int(np.flatnonzero(~table.valid(n))[0])
        raise SingularOrbit(f"point {bad} meets the singular set within {n - 1} steps")
    times = pair_times(table, eps, n_min=n)
    close = times.tau >= n
    return times.i[close], times.j[close]


def verify_separated(sys: System, s: SeparatedSet) -> bool:
    """True iff every pair of ``s`` is (eps, n)-separated."""
    if len(s) < 2:
        return True
    i, _ = separation_violations(sys, s.points, s.eps, s.n)
    return len(i) == 0


def separated_by_distances(dist, eps: float) -> bool:
    """Separation check for an explicit finite metric (pairwise distances >= eps)."""
    d = np.asarray(dist, dtype=float)
    i, j = np.triu_indices(len(d), 1)
    return bool(np.all(d[i, j] >= eps))


@dataclass
class InjectionResult:
    """Either an injective map B -> A (``mapping[b] = a``, by position) or a
    Hall-violation witness: B-positions S with fewer A-neighbours than |S|."""

    mapping: dict[int, int] | None
    witness: list[int] | None = None
    witness_neighbors: list[int] | None = None
    matched_distances: dict[int, float] = field(default_factory=dict)
    n_a: int = 0

    @property
    def found(self) -> bool:
        return self.mapping is not None

    @property
    def is_bijection(self) -> bool:
        return (self.mapping is not None and len(self.mapping) == self.n_a
                and len(set(self.mapping.values())) == self.n_a)


def injection_from_adjacency(n_b: int, n_a: int, adj, dist=None) -> InjectionResult:
    """Injection B -> A inside a given bipartite closeness relation."""
    match_b, match_a = hopcroft_karp(n_b, n_a, adj)
    if (match_b >= 0).all():
        mapping = {b: int(match_b[b]) for b in range(n_b)}
        dists = {b: float(dist[(b, a)]) for b, a in mapping.items()} if dist is not None else {}
        return InjectionResult(mapping, matched_distances=dists, n_a=n_a)
    s, nbhd = hall_violator(n_b, adj, match_b, match_a)
    return InjectionResult(None, s, nbhd, n_a=n_a)


def hall_injection(sys: System, B: SeparatedSet, A: SeparatedSet) -> InjectionResult:
    """Injection alpha: B -> A with d_n(x, alpha(x)) < eps, or a Hall witness.

    A witness certifies that A is not optimal among the points considered.
    """
    if B.eps != A.eps or B.n != A.n:
        raise MismatchedParameters(f"(eps, n) differ: {(B.eps, B.n)} vs {(A.eps, A.n)}")
    eps, n = A.eps, A.n
    nb, na = len(B), len(A)
    if nb == 0:
        return InjectionResult({}, n_a=na)
    if na == 0:
        return InjectionResult(None, list(range(nb)), [], n_a=0)
    pts = np.concatenate([B.points, A.points])
    table = orbit_table(sys, pts, n)
    i, j = sys.close_pairs(pts, eps)
    cross = (i < nb) & (j >= nb)
    times = pair_times(table, eps, pairs=(i[cross], j[cross]))
    close = times.tau >= n
    bi, ai = times.i[close], times.j[close] - nb
    adj = [[] for _ in range(nb)]
    for b, a in sorted(zip(bi.tolist(), ai.tolist())):
        adj[b].append(a)
    # d_n of the accepted pairs, for the post-condition report
    dn = bowen_distance_array(table, bi, ai + nb, n)
    dist = {(b, a): d for b, a, d in zip(bi.tolist(), ai.tolist(), dn.tolist())}
    res = injection_from_adjacency(nb, na, adj, dist)
    if res.found:
        assert len(set(res.mapping.values())) == nb
        assert all(d < eps for d in res.matched_distances.values())
    return res
