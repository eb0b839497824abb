"""(eps, n)-complexity curves, growth diagnostics, and entropy / dimension fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bowen import OrbitTable, PairTimes, orbit_table, pair_times
from .errors import BudgetExceeded, InsufficientData, MonotonicityViolation
from .separated import (
    CLOSED_FORM,
    MAXIMAL_GREEDY,
    SeparatedSet,
    closeness_graph,
    exact_maximum,
)
from .systems import CandidateSet, Iet, Sft, System

SFT_EXACT = "sft-exact"
IET_CLOSED_FORM = "iet-closed-form"
MIS_EXACT = "mis-exact"
MIS_GREEDY = "mis-greedy"
EXACT_METHODS = (SFT_EXACT, IET_CLOSED_FORM, MIS_EXACT)


# ---------------------------------------------------------------------------
# closed forms


def _matpow(M: Sequence[Sequence[int]], e: int) -> list[list[int]]:
    p = len(M)
    result = [[int(i == j) for j in range(p)] for i in range(p)]
    base = [[int(v) for v in row] for row in M]

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(p)) for j in range(p)] for i in range(p)]

    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


def count_words(M: Sequence[Sequence[int]], length: int) -> int:
    """Number of admissible words of the given length (Python integers, no overflow)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return sum(sum(row) for row in _matpow(M, length - 1))


def sft_complexity_exact(M: Sequence[Sequence[int]], k: int, n: int) -> int:
    """C_{2^-k, n} of the subshift: the number of admissible words of length n + k."""
    if k < 0 or n < 1:
        raise ValueError("need k >= 0 and n >= 1")
    return count_words(M, n + k)


def iet_complexity_closed_form(m: int, n: int) -> int:
    """(m - 1)(n - 1) + 1, valid once every cell of the D_n partition is shorter than eps."""
    if m < 2 or n < 1:
        raise ValueError("need m >= 2 and n >= 1")
    return (m - 1) * (n - 1) + 1


def dyadic_exponent(eps: float) -> int | None:
    """k with eps == 2^-k exactly, else None."""
    if eps <= 0 or eps > 1:
        return None
    mant, exp = math.frexp(eps)
    return 1 - exp if mant == 0.5 else None


def iet_n0(iet: Iet, eps: float, n_max: int = 100_000) -> int:
    """First n whose D_n partition has every cell shorter than eps."""
    for n in range(1, n_max + 1):
        if np.diff(iet.partition(n)).max() < eps:
            return n
    raise InsufficientData(f"partition cells still >= {eps} at n = {n_max}")


def iet_closed_form_set(iet: Iet, n: int) -> np.ndarray:
    """One point per cell of the D_n partition (cell midpoints)."""
    b = iet.partition(n)
    return 0.5 * (b[:-1] + b[1:])


# ---------------------------------------------------------------------------
# curves


@dataclass
class ComplexityCurve:
    """n -> C_{eps,n} with the method that produced each value."""

    eps: float
    n: list[int] = field(default_factory=list)
    C: list[int] = field(default_factory=list)
    method: list[str] = field(default_factory=list)
    sets: dict[int, SeparatedSet] = field(default_factory=dict, repr=False)
    notes: dict = field(default_factory=dict)

    def add(self, n: int, c: int, method: str, s: SeparatedSet | None = None) -> None:
        if self.n and n <= self.n[-1]:
            raise ValueError("entries must be added in increasing n")
        self.n.append(int(n))
        self.C.append(int(c))
        self.method.append(method)
        if s is not None:
            self.sets[int(n)] = s

    def __len__(self) -> int:
        return len(self.n)

    def value(self, n: int) -> int:
        return self.C[self.n.index(n)]

    def rows(self):
        return [(self.eps, n, c, m) for n, c, m in zip(self.n, self.C, self.method)]

    @property
    def all_exact(self) -> bool:
        return all(m in EXACT_METHODS for m in self.method)

    def check_monotone(self) -> None:
        """C must not drop between exact entries; greedy entries are only bounds."""
        last = None
        for n, c, m in zip(self.n, self.C, self.method):
            if c < 1:
                raise MonotonicityViolation(f"C({n}) = {c} < 1")
            if m not in EXACT_METHODS:
                continue
            if last is not None and c < last[1]:
                raise MonotonicityViolation(
                    f"C drops from {last[1]} at n={last[0]} to {c} at n={n}; candidate set too coarse")
            last = (n, c)


def complexity_curve(
    sys: System,
    eps: float,
    n_range: Iterable[int],
    cands: CandidateSet | None = None,
    budget: int = 1_000_000,
    *,
    keep_sets: bool = False,
    table: OrbitTable | None = None,
    times: PairTimes | None = None,
    formula: bool = True,
) -> ComplexityCurve:
    """C_{eps,n} for each n by the best available method.

    Subshifts at dyadic eps use the word count (unless ``formula`` is off);
    everything else solves the maximum independent set of the closeness
    graph on ``cands``.  An entry
    whose search hits ``budget`` keeps the incumbent and is marked greedy.
    """
    ns = sorted({int(n) for n in n_range})
    if not ns or ns[0] < 1:
        raise ValueError("n_range must be non-empty with n >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    curve = ComplexityCurve(eps)
    k = dyadic_exponent(eps)
    if isinstance(sys, Sft) and k is not None and formula and not keep_sets:
        for n in ns:
            curve.add(n, sft_complexity_exact(sys.M, k, n), SFT_EXACT)
        curve.check_monotone()
        return curve
    if cands is None:
        raise ValueError("a candidate set is required")
    if table is None or table.n_max < ns[-1]:
        table = orbit_table(sys, cands, ns[-1])
    if times is None:
        times = pair_times(table, eps, n_min=ns[0])
    for n in ns:
        g = closeness_graph(sys, cands, eps, n, table=table, times=times)
        try:
            s = exact_maximum(g, budget, sys=sys, cands=cands)
            method = MIS_EXACT
        except BudgetExceeded as exc:
            s = exc.incumbent
            method = MIS_GREEDY
        curve.add(n, len(s), method, s if keep_sets else None)
    curve.notes["candidates"] = dict(cands.descriptor, size=len(cands))
    curve.check_monotone()
    return curve


def iet_closed_form_curve(iet: Iet, eps: float, n_range: Iterable[int]) -> ComplexityCurve:
    """Closed-form curve on the part of ``n_range`` at or beyond the measured n_0."""
    n0 = iet_n0(iet, eps)
    curve = ComplexityCurve(eps, notes={"n0": n0})
    for n in sorted({int(n) for n in n_range}):
        if n < n0:
            continue
        pts = iet_closed_form_set(iet, n)
        s = SeparatedSet(iet, pts, eps, n, CLOSED_FORM, {"formula": "(m-1)(n-1)+1", "n0": n0})
        curve.add(n, iet_complexity_closed_form(iet.m, n), IET_CLOSED_FORM, s)
    return curve


def synthetic_curve(eps: float, n_range: Iterable[int], fn) -> ComplexityCurve:
    """Curve with C_n = fn(n), for exercising the diagnostics."""
    curve = ComplexityCurve(eps)
    for n in sorted(n_range):
        curve.add(n, int(fn(n)), "synthetic")
    return curve


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class GrowthDiagnostics:
    """q_n = (C_n - C_{n-1}) / C_n with running lower/upper limits.

    The running values at n are min/max of q over the window [ceil(n/2), n].
    ``subsequence`` lists the n in the second half of the range with q_n
    within ``tol`` of the final liminf; it stands in for the ultrafilter.
    """

    n: list[int]
    q: list[float]
    liminf_so_far: list[float]
    limsup_so_far: list[float]
    liminf: float
    limsup: float
    subsequence: list[int]
    tol: float

    @property
    def subexponential_consistent(self) -> bool:
        return self.liminf <= self.tol

    def q_at(self, n: int) -> float:
        return self.q[self.n.index(n)]

    def rows(self):
        return list(zip(self.n, self.q, self.liminf_so_far, self.limsup_so_far))


def growth_diagnostic(curve: ComplexityCurve, tol: float = 1e-2) -> GrowthDiagnostics:
    ns, qs = [], []
    val = dict(zip(curve.n, curve.C))
    for n in curve.n:
        if n - 1 in val:
            ns.append(n)
            qs.append((val[n] - val[n - 1]) / val[n])
    if not ns:
        raise InsufficientData("need at least two consecutive entries")
    lo, hi = [], []
    for n in ns:
        window = [q for m, q in zip(ns, qs) if math.ceil(n / 2) <= m <= n]
        lo.append(min(window))
        hi.append(max(window))
    tail = [(m, q) for m, q in zip(ns, qs) if m >= math.ceil(ns[-1] / 2)]
    liminf = min(q for _, q in tail)
    limsup = max(q for _, q in tail)
    sub = [m for m, q in tail if q <= liminf + tol]
    return GrowthDiagnostics(ns, qs, lo, hi, liminf, limsup, sub, tol)


def _slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)[0])


@dataclass
class EntropyEstimate:
    value: float
    eps: float
    table: list[tuple[float, float, int, int]]  # (eps, slope, n_lo, n_hi)


def entropy_estimate(curves: Sequence[ComplexityCurve], tail: float = 0.5,
                     min_points: int = 5) -> EntropyEstimate:
    """Least-squares slope of ln C against n over the tail of each curve.

    The reported value belongs to the smallest eps; the per-eps table shows
    the trend without extrapolating to eps -> 0.
    """
    if not curves:
        raise InsufficientData("no curves")
    table = []
    for c in sorted(curves, key=lambda c: -c.eps):
        start = int(math.floor(len(c) * (1.0 - tail)))
        ns, cs = c.n[start:], c.C[start:]
        if len(ns) < min_points:
            raise InsufficientData(f"eps={c.eps}: tail window has {len(ns)} < {min_points} entries")
        table.append((c.eps, _slope(ns, np.log(cs)), ns[0], ns[-1]))
    return EntropyEstimate(table[-1][1], table[-1][0], table)


@dataclass
class DimensionEstimate:
    value: float
    n: int
    eps: list[float]
    C: list[int]


def box_dimension_estimate(sys: System, n: int, eps_list: Sequence[float],
                           cands: CandidateSet | None = None,
                           budget: int = 1_000_000) -> DimensionEstimate:
    """Slope of ln C_{eps,n} against -ln eps at fixed n."""
    eps_list = sorted({float(e) for e in eps_list}, reverse=True)
    if len(eps_list) < 2 or eps_list[0] / eps_list[-1] < 10.0 * (1 - 1e-12):
        raise InsufficientData("eps_list must span at least one decade")
    counts = []
    table = None
    for eps in eps_list:
        if isinstance(sys, Sft) and dyadic_exponent(eps) is not None:
            counts.append(sft_complexity_exact(sys.M, dyadic_exponent(eps), n))
            continue
        if table is None:
            table = orbit_table(sys, cands, n)
        curve = complexity_curve(sys, eps, [n], cands, budget, table=table)
        counts.append(curve.C[0])
    value = _slope(-np.log(eps_list), np.log(counts))
    return DimensionEstimate(value, n, eps_list, counts)
