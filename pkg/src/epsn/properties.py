"""Seeded random property suites: subadditivity, injections into optimal sets,
preimage separation, and monotonicity of C_{eps,n}.

Every instance draws a small random candidate set so that exact maximum
independent sets are cheap; failures are implementation bugs, not expected
outcomes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bowen import orbit_table
from .errors import BudgetExceeded, NotOptimal
from .separated import (
    SeparatedSet,
    closeness_graph,
    exact_maximum,
    greedy_maximal,
    hall_injection,
    verify_separated,
)
from .systems import CandidateSet, Doubling, Iet, Sft, System, TwoCircle

log = logging.getLogger(__name__)

PROPERTIES = ("subadditivity", "injection", "preimage_separation", "monotonicity")


@dataclass
class PropertyCount:
    name: str
    instances: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    approximate: int = 0
    failures: list[str] = field(default_factory=list)

    def row(self):
        return (self.name, self.instances, self.passed, self.failed, self.skipped, self.approximate)


class _Approximate(Exception):
    pass


def _preimage_spread(sys: System) -> float:
    """Smallest distance between two preimages of one point."""
    if isinstance(sys, Doubling):
        return 0.5
    if isinstance(sys, TwoCircle):
        return 1.0 / 3.0
    if isinstance(sys, Sft):
        return 1.0
    return float("inf")


def random_words(sys: Sft, length: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Distinct admissible words from random walks on the transition graph."""
    M = sys.matrix
    out = np.empty((count, length), dtype=np.int8)
    out[:, 0] = rng.integers(0, sys.p, count)
    for t in range(1, length):
        for r in range(count):
            allowed = np.flatnonzero(M[out[r, t - 1]])
            out[r, t] = allowed[rng.integers(0, len(allowed))]
    return np.unique(out, axis=0)


def random_candidates(sys: System, size: int, n: int, eps: float,
                      rng: np.random.Generator, extra: int = 1) -> CandidateSet:
    """``size`` random points whose orbits stay usable for n + extra steps.

    IET points are images of random points, so each has a usable preimage.
    """
    steps = n + extra
    if isinstance(sys, Sft):
        length = steps + Sft.prefix_length(eps, inclusive=True) + 2
        pts = random_words(sys, length, size, rng)
        return CandidateSet(sys, pts, {"random": size, "word_length": length})
    if isinstance(sys, TwoCircle):
        pts = np.column_stack([rng.integers(0, 2, size).astype(float), rng.random(size)])
    else:
        pts = rng.random(size)
    if isinstance(sys, Iet):
        table = orbit_table(sys, pts, steps + 1, 1e-9)
        pts = sys.step_array(pts[table.valid(steps + 1)])
    return CandidateSet(sys, pts, {"random": size}, exclusion_radius=1e-9)


def _exact(sys, cands, eps, n, budget) -> SeparatedSet:
    g = closeness_graph(sys, cands, eps, n)
    try:
        return exact_maximum(g, budget, sys=sys, cands=cands)
    except BudgetExceeded as exc:
        raise _Approximate(str(exc)) from exc


def check_subadditivity(sys, cands, eps, n, rng, budget) -> str | None:
    """C(B1 u B2) <= C(B1) + C(B2) for a random split."""
    mask = rng.random(len(cands)) < 0.5
    if mask.all() or not mask.any():
        mask[0] = not mask[0]
    whole = len(_exact(sys, cands, eps, n, budget))
    a = len(_exact(sys, cands.subset(np.flatnonzero(mask)), eps, n, budget))
    b = len(_exact(sys, cands.subset(np.flatnonzero(~mask)), eps, n, budget))
    return None if whole <= a + b else f"C={whole} > {a} + {b}"


def check_injection(sys, cands, eps, n, rng, budget) -> str | None:
    """Any separated B injects into an exact optimum A; A minus a point gives a witness."""
    A = _exact(sys, cands, eps, n, budget)
    g = closeness_graph(sys, cands, eps, n)
    order = rng.permutation(g.n_vertices)
    full = greedy_maximal(g, order, sys=sys, cands=cands)
    keep = rng.random(len(full)) < 0.7
    keep[rng.integers(0, len(full))] = True
    B = SeparatedSet(sys, full.points[keep], eps, n, full.status, {}, full.indices[keep])
    res = hall_injection(sys, B, A)
    if not res.found:
        return f"no injection of |B|={len(B)} into |A|={len(A)}"
    if any(d >= eps for d in res.matched_distances.values()):
        return "matched pair with d_n >= eps"
    drop = rng.integers(0, len(A))
    rest = np.delete(np.arange(len(A)), drop)
    weak = SeparatedSet(sys, A.points[rest], eps, n, "maximal-greedy", {}, A.indices[rest])
    res = hall_injection(sys, A, weak)
    if res.found:
        return "non-optimal set accepted an injection"
    if len(res.witness_neighbors) >= len(res.witness):
        return "Hall witness does not violate the condition"
    return None


def _preimage_array(sys: System, pts: np.ndarray) -> np.ndarray:
    return sys.to_array([q for p in sys.from_array(pts) for q in sys.preimages(p)])


def check_preimage_separation(sys, cands, eps, n, rng, budget) -> str | None:
    """The full preimage of an optimal (eps, n-1)-set is (eps, n)-separated and at most C_{eps,n}."""
    if eps > _preimage_spread(sys):
        return "skip"
    m = max(n - 1, 1)
    A = _exact(sys, cands, eps, m, budget)
    pre = SeparatedSet(sys, _preimage_array(sys, A.points), eps, m + 1, "preimage")
    if not verify_separated(sys, pre):
        return f"preimage of an ({eps}, {m})-separated set is not ({eps}, {m + 1})-separated"
    universe = CandidateSet(sys, _preimage_array(sys, cands.points), {"preimage": True},
                            cands.exclusion_radius)
    c = len(_exact(sys, universe, eps, m + 1, budget))
    return None if len(pre) <= c else f"|f^-1 A| = {len(pre)} > C = {c}"


def check_monotonicity(sys, cands, eps, n, rng, budget) -> str | None:
    """C_{eps,n} <= C_{eps,n+1} and C_{eps,n} <= C_{eps/2,n} on one candidate set."""
    c = len(_exact(sys, cands, eps, n, budget))
    c_next = len(_exact(sys, cands, eps, n + 1, budget))
    c_fine = len(_exact(sys, cands, eps / 2, n, budget))
    if c_next < c:
        return f"C drops from {c} to {c_next} at n={n + 1}"
    if c_fine < c:
        return f"C drops from {c} to {c_fine} when eps halves"
    return None


_CHECKS = {
    "subadditivity": check_subadditivity,
    "injection": check_injection,
    "preimage_separation": check_preimage_separation,
    "monotonicity": check_monotonicity,
}


def run_suite(sys: System, eps_list, n_list, instances: int, seed: int, *,
              budget: int = 100_000, approximate: bool = False,
              size: tuple[int, int] = (12, 60), properties=PROPERTIES) -> list[PropertyCount]:
    """``instances`` seeded random instances of each property.

    An instance whose exact search exceeds ``budget`` raises NotOptimal,
    or is counted as approximate and skipped when ``approximate`` is set.
    """
    out = []
    for k, name in enumerate(properties):
        check = _CHECKS[name]
        rng = np.random.default_rng([seed, k])
        count = PropertyCount(name)
        for _ in range(instances):
            eps = float(eps_list[rng.integers(0, len(eps_list))])
            n = int(n_list[rng.integers(0, len(n_list))])
            cands = random_candidates(sys, int(rng.integers(size[0], size[1] + 1)), n, eps, rng)
            count.instances += 1
            if len(cands) < 2:
                count.skipped += 1
                continue
            try:
                msg = check(sys, cands, eps, n, rng, budget)
            except _Approximate as exc:
                if not approximate:
                    raise NotOptimal(f"{name}: {exc}") from exc
                count.approximate += 1
                continue
            if msg == "skip":
                count.skipped += 1
            elif msg is None:
                count.passed += 1
            else:
                count.failed += 1
                count.failures.append(f"eps={eps} n={n}: {msg}")
                log.warning("%s failed: %s", name, msg)
        out.append(count)
    return out
