"""Orbits, Bowen metrics d_n, and sampled expansivity / continuity profiles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCandidateSet, HorizonExhausted, SingularOrbit, SingularPoint
from .systems import CandidateSet, Iet, PhasePoint, Sft, System, Word


def orbit(sys: System, p: PhasePoint, n: int) -> list[PhasePoint]:
    """[p, f p, ..., f^{n-1} p]."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    sys.validate_point(p)
    if isinstance(p, Word) and p.horizon < n:
        raise HorizonExhausted(f"word of horizon {p.horizon} has no orbit of length {n}")
    out = [p]
    for _ in range(n - 1):
        try:
            out.append(sys.apply(out[-1]))
        except SingularPoint as exc:
            raise SingularOrbit(str(exc)) from exc
    return out


def bowen_distance(sys: System, x: PhasePoint, y: PhasePoint, n: int) -> float:
    """d_n(x, y) = max_{0 <= i < n} d(f^i x, f^i y)."""
    ox, oy = orbit(sys, x, n), orbit(sys, y, n)
    return max(sys.distance(a, b) for a, b in zip(ox, oy))


def is_separated(sys: System, x: PhasePoint, y: PhasePoint, eps: float, n: int) -> bool:
    """True iff d_n(x, y) >= eps."""
    return bowen_distance(sys, x, y, n) >= eps


# ---------------------------------------------------------------------------
# bulk orbit tables


@dataclass(eq=False)
class OrbitTable:
    """Orbit segments f^0 x .. f^{n_max-1} x of a batch of points.

    ``hit_time[p]`` is the first step t at which f^t x_p lies within the
    exclusion radius of S (``n_max`` if never).  A point is usable for d_n
    only when ``hit_time >= n - 1``.
    """

    system: System
    points: np.ndarray
    n_max: int
    states: list[np.ndarray]
    hit_time: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def valid(self, n: int) -> np.ndarray:
        return self.hit_time >= n - 1

    def at(self, t: int) -> np.ndarray:
        return self.states[t]


def orbit_table(sys: System, points: np.ndarray | CandidateSet, n_max: int,
                exclusion_radius: float | None = None) -> OrbitTable:
    if isinstance(points, CandidateSet):
        if exclusion_radius is None:
            exclusion_radius = points.exclusion_radius
        points = points.points
    if exclusion_radius is None:
        exclusion_radius = 0.0
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if isinstance(sys, Sft) and points.shape[1] < n_max:
        raise HorizonExhausted(f"words of horizon {points.shape[1]} cannot carry {n_max} steps")
    states = [points]
    hit = np.full(len(points), n_max, dtype=np.int64)
    singular = isinstance(sys, Iet)
    for t in range(n_max):
        if singular and t < n_max - 1:
            near = sys.singular_distance_array(states[t]) <= exclusion_radius
            hit[near & (hit == n_max)] = t
        if t < n_max - 1:
            states.append(sys.step_array(states[t]))
    return OrbitTable(sys, points, n_max, states, hit)


@dataclass(eq=False)
class PairTimes:
    """Candidate pairs (i < j) with their separation times.

    ``tau[k]`` is the first step t < n_max with d(f^t x_i, f^t x_j) >= eps
    (> eps when ``strict``), or n_max when no such step exists.  So
    d_n(x_i, x_j) >= eps iff tau < n.  Only pairs with tau >= n_min are
    listed, so the table answers d_n queries for n_min <= n <= n_max.
    """

    i: np.ndarray
    j: np.ndarray
    tau: np.ndarray
    base: np.ndarray
    eps: float
    n_max: int
    strict: bool = False
    n_min: int = 1
    stats: dict = field(default_factory=dict)


_EMBED_STEPS = 8


def pair_times(table: OrbitTable, eps: float, *, strict: bool = False,
               pairs: tuple[np.ndarray, np.ndarray] | None = None,
               n_min: int = 1) -> PairTimes:
    """Separation times for every pair not yet separated after n_min steps.

    With n_min = 1 these are the pairs at base distance below ``eps``.  For
    larger n_min the pairs come from a cell join over the first few orbit
    steps, which avoids listing the many pairs that separate early.
    """
    sys = table.system
    if not 1 <= n_min <= table.n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    if pairs is None and n_min == 1:
        i, j = sys.close_pairs(table.points, eps, inclusive=strict)
    elif pairs is None:
        k = min(n_min, _EMBED_STEPS)
        i, j = sys.orbit_pairs(table.states[:k], eps)
    else:
        i, j = pairs
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    tau = np.full(len(i), table.n_max, dtype=np.int64)
    base = sys.dist_array(table.points[i], table.points[j]) if len(i) else np.empty(0)
    active = np.arange(len(i))
    for t in range(table.n_max):
        if len(active) == 0:
            break
        st = table.states[t]
        d = base[active] if t == 0 else sys.dist_array(st[i[active]], st[j[active]])
        sep = d > eps if strict else d >= eps
        tau[active[sep]] = t
        active = active[~sep]
    if n_min > 1:
        keep = tau >= n_min
        i, j, tau, base = i[keep], j[keep], tau[keep], base[keep]
    return PairTimes(i, j, tau, base, eps, table.n_max, strict, n_min)


def bowen_distance_array(table: OrbitTable, i: np.ndarray, j: np.ndarray, n: int) -> np.ndarray:
    """d_n for index pairs of an orbit table."""
    sys = table.system
    out = np.zeros(len(i))
    for t in range(n):
        st = table.states[t]
        out = np.maximum(out, sys.dist_array(st[i], st[j]))
    return out


# ---------------------------------------------------------------------------
# profiles


@dataclass
class ExpansivityProfile:
    """Sampled lower bounds delta_hat_n = max{d(x,y) : d_n(x,y) <= eps}."""

    eps: float
    n: list[int]
    delta_hat: list[float]
    pairs_checked: list[int]
    sample: dict

    def delta(self, n: int) -> float:
        return self.delta_hat[self.n.index(n)]

    def rows(self):
        return list(zip(self.n, self.delta_hat, self.pairs_checked))


def expansivity_profile(sys: System, eps: float, n_max: int, cands: CandidateSet,
                        table: OrbitTable | None = None) -> ExpansivityProfile:
    """delta_hat_n for n = 1..n_max over all candidate pairs.

    ``pairs_checked`` counts the sampled pairs with d_n <= eps at each n.
    The n = 1 row is counted without listing pairs, so large eps stays cheap.
    """
    if len(cands) < 2:
        raise EmptyCandidateSet("need at least two candidates")
    sample = dict(cands.descriptor, size=len(cands))
    if isinstance(sys, Sft):
        # d_n <= eps iff the words share their first n - 1 + t symbols
        if cands.points.shape[1] < n_max:
            raise HorizonExhausted(f"words of horizon {cands.points.shape[1]} cannot carry {n_max} steps")
        t = Sft.prefix_length(eps, inclusive=True)
        rows = [sys.close_stats(cands.points, 2.0 ** -(n - 1 + t)) for n in range(1, n_max + 1)]
        return ExpansivityProfile(eps, list(range(1, n_max + 1)), [d for _, d in rows],
                                  [c for c, _ in rows], sample)
    if table is None:
        table = orbit_table(sys, cands, n_max)
    count, dmax = sys.close_stats(table.points[table.valid(1)], eps)
    ns, deltas, counts = [1], [dmax], [count]
    if n_max >= 2:
        pt = pair_times(table, eps, strict=True, n_min=2)
        for n in range(2, n_max + 1):
            valid = table.valid(n)
            keep = (pt.tau >= n) & valid[pt.i] & valid[pt.j]
            ns.append(n)
            deltas.append(float(pt.base[keep].max()) if keep.any() else 0.0)
            counts.append(int(keep.sum()))
    return ExpansivityProfile(eps, ns, deltas, counts, sample)


def continuity_modulus(sys: System, sigma_list, delta: float,
                       cands: CandidateSet) -> list[tuple[float, float]]:
    """eta_hat(sigma) = max d(fx, fy) over pairs with d(x,y) <= sigma, both delta-far from S."""
    sigmas = [float(s) for s in sigma_list]
    if any(not (0.0 < s < delta) for s in sigmas):
        raise ValueError("need 0 < sigma < delta")
    keep = sys.singular_distance_array(cands.points) >= delta
    pts = cands.points[keep]
    if len(pts) < 2:
        raise EmptyCandidateSet("no candidates left after removing the delta-neighbourhood of S")
    i, j = sys.close_pairs(pts, max(sigmas), inclusive=True)
    base = sys.dist_array(pts[i], pts[j])
    img = sys.step_array(pts)
    moved = sys.dist_array(img[i], img[j])
    out = []
    for s in sigmas:
        sel = base <= s
        out.append((s, float(moved[sel].max()) if sel.any() else 0.0))
    return out
