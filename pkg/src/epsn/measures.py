"""Empirical measures on optimal separated sets and the tests run on them.

A measure is the equal-weight atomic measure 1/C on an optimal
(eps, n)-separated set.  Limits in n are never formed; each check reports
the finite-n surrogate and leaves convergence to the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .bowen import ExpansivityProfile, continuity_modulus
from .complexity import (
    complexity_curve,
    dyadic_exponent,
    iet_closed_form_set,
    iet_complexity_closed_form,
    iet_n0,
)
from .errors import (
    EpsnError,
    InadmissibleWord,
    NoConvergence,
    NotOptimal,
    NotPrimitive,
    OverlappingParts,
    SingularAtom,
    UnsupportedSystem,
)
from .separated import CLOSED_FORM, SeparatedSet, hall_injection, verify_separated
from .systems import CandidateSet, Doubling, Iet, Sft, System, TwoCircle

# ---------------------------------------------------------------------------
# set descriptors


@dataclass(frozen=True)
class Interval:
    """Half-open arc [lo, hi) of [0, 1); hi may exceed 1 to wrap around the circle."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < 1.0 and self.lo < self.hi <= self.lo + 1.0):
            raise ValueError(f"bad interval [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def shifted(self, omega: float) -> "Interval":
        lo = (self.lo + omega) % 1.0
        return Interval(lo, lo + self.length)

    def _coord(self, sys: System, arr: np.ndarray) -> np.ndarray:
        return sys.coordinate(arr)

    def contains(self, sys: System, arr: np.ndarray) -> np.ndarray:
        x = self._coord(sys, arr)
        return ((x - self.lo) % 1.0) < self.length

    def on_boundary(self, sys: System, arr: np.ndarray) -> np.ndarray:
        x = self._coord(sys, arr)
        return (x == self.lo) | (x == self.hi % 1.0)

    def _arcs(self):
        if self.hi <= 1.0:
            return [(self.lo, self.hi)]
        return [(self.lo, 1.0), (0.0, self.hi - 1.0)]

    def overlaps(self, other) -> bool:
        if not isinstance(other, Interval):
            return False
        # shared endpoints produced by float shifts are not overlaps
        tol = 1e-12
        return any(a < d - tol and c < b - tol for a, b in self._arcs() for c, d in other._arcs())

    def describe(self) -> str:
        return f"[{self.lo:.6g},{self.hi:.6g})"


@dataclass(frozen=True)
class LabeledInterval:
    """Arc [lo, hi) on circle ``label`` of the two-circle space."""

    label: int
    lo: float = 0.0
    hi: float = 1.0

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def _base(self) -> Interval:
        return Interval(self.lo, self.hi)

    def contains(self, sys: System, arr: np.ndarray) -> np.ndarray:
        return (arr[:, 0] == self.label) & self._base().contains(sys, arr)

    def on_boundary(self, sys: System, arr: np.ndarray) -> np.ndarray:
        return (arr[:, 0] == self.label) & self._base().on_boundary(sys, arr)

    def overlaps(self, other) -> bool:
        return (isinstance(other, LabeledInterval) and other.label == self.label
                and self._base().overlaps(other._base()))

    def describe(self) -> str:
        return f"{self.label}x{self._base().describe()}"


@dataclass(frozen=True)
class Cylinder:
    """Words whose first symbols are ``word``."""

    word: tuple[int, ...]

    @classmethod
    def parse(cls, text: str) -> "Cylinder":
        return cls(tuple(int(ch) for ch in text))

    def contains(self, sys: System, arr: np.ndarray) -> np.ndarray:
        k = len(self.word)
        if arr.shape[1] < k:
            raise InadmissibleWord(f"atoms of horizon {arr.shape[1]} cannot resolve {self.describe()}")
        return (arr[:, :k] == np.asarray(self.word, dtype=arr.dtype)).all(axis=1)

    def on_boundary(self, sys: System, arr: np.ndarray) -> np.ndarray:
        return np.zeros(len(arr), dtype=bool)

    def overlaps(self, other) -> bool:
        if not isinstance(other, Cylinder):
            return False
        k = min(len(self.word), len(other.word))
        return self.word[:k] == other.word[:k]

    def describe(self) -> str:
        return "[" + "".join(map(str, self.word)) + "]"


SetDescriptor = Interval | LabeledInterval | Cylinder


def equal_intervals(k: int) -> list[Interval]:
    return [Interval(i / k, (i + 1) / k) for i in range(k)]


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Base class: a bounded function on phase space with an optional Lipschitz bound."""

    __test__ = False  # not a pytest class

    def __call__(self, sys: System, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def sup_norm(self) -> float:
        raise NotImplementedError

    @property
    def lipschitz(self) -> float | None:
        return None

    @property
    def name(self) -> str:
        raise NotImplementedError

    def modulus(self, delta: float) -> float:
        """Upper bound on sup |phi(x) - phi(y)| over d(x, y) <= delta."""
        cap = 2.0 * self.sup_norm
        return cap if self.lipschitz is None else min(self.lipschitz * delta, cap)


@dataclass(frozen=True)
class Indicator(TestFunction):
    part: SetDescriptor

    def __call__(self, sys, arr):
        return self.part.contains(sys, arr).astype(float)

    @property
    def sup_norm(self):
        return 1.0

    @property
    def name(self):
        return f"chi{self.part.describe()}"


@dataclass(frozen=True)
class Trig(TestFunction):
    """cos or sin of 2 pi j times the system coordinate."""

    j: int
    kind: str = "cos"

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise ValueError("kind must be 'cos' or 'sin'")

    def __call__(self, sys, arr):
        t = 2.0 * math.pi * self.j * sys.coordinate(arr)
        return np.cos(t) if self.kind == "cos" else np.sin(t)

    @property
    def sup_norm(self):
        return 1.0

    @property
    def lipschitz(self):
        return 2.0 * math.pi * abs(self.j)

    @property
    def name(self):
        return f"{self.kind}{self.j}"


@dataclass(frozen=True)
class Lipschitz(TestFunction):
    """Arbitrary function with a declared Lipschitz bound and sup norm."""

    fn: Callable[[System, np.ndarray], np.ndarray]
    bound: float
    sup: float
    label: str = "lipschitz"

    def __call__(self, sys, arr):
        return np.asarray(self.fn(sys, arr), dtype=float)

    @property
    def sup_norm(self):
        return self.sup

    @property
    def lipschitz(self):
        return self.bound

    @property
    def name(self):
        return self.label


@dataclass(frozen=True)
class Constant(TestFunction):
    c: float = 1.0

    def __call__(self, sys, arr):
        return np.full(len(arr), float(self.c))

    @property
    def sup_norm(self):
        return abs(self.c)

    @property
    def lipschitz(self):
        return 0.0

    @property
    def name(self):
        return f"const{self.c:g}"


def distance_to(sys: System, point_arr: np.ndarray, label: str = "dist") -> Lipschitz:
    """x -> d(x, p): 1-Lipschitz by the triangle inequality."""
    p = np.asarray(point_arr)

    def fn(s, arr):
        target = np.broadcast_to(p, arr.shape) if arr.ndim > 1 else np.full(len(arr), float(p))
        return s.dist_array(arr, target)

    return Lipschitz(fn, 1.0, 1.0, label)


def trig_family(j_max: int) -> list[Trig]:
    return [Trig(j, kind) for j in range(1, j_max + 1) for kind in ("cos", "sin")]


# ---------------------------------------------------------------------------
# measures


@dataclass(eq=False)
class EmpiricalMeasure:
    """Weight 1/C on each atom of a separated set."""

    system: System
    atoms: np.ndarray
    eps: float
    n: int
    status: str
    approximate: bool = False
    provenance: dict = field(default_factory=dict)

    @property
    def C(self) -> int:
        return len(self.atoms)

    @property
    def weight(self) -> Fraction:
        return Fraction(1, self.C)

    @classmethod
    def from_set(cls, s: SeparatedSet, *, approximate: bool = False,
                 verify: bool = True) -> "EmpiricalMeasure":
        if not s.is_optimal and not approximate:
            raise NotOptimal(f"set at n={s.n} has status {s.status}")
        if len(s) == 0:
            raise EpsnError("empty separated set")
        if verify and not verify_separated(s.system, s):
            raise EpsnError(f"atoms at (eps={s.eps}, n={s.n}) are not separated")
        prov = {"system": s.system.to_json(), "certificate": dict(s.certificate)}
        return cls(s.system, s.points, s.eps, s.n, s.status, not s.is_optimal, prov)

    def to_json(self) -> dict:
        atoms = self.atoms.tolist()
        return {"eps": self.eps, "n": self.n, "status": self.status,
                "approximate": self.approximate, "C": self.C, "atoms": atoms}


def empirical_functional(m: EmpiricalMeasure, phi: TestFunction) -> float:
    """(1/C) sum of phi over the atoms."""
    return math.fsum(phi(m.system, m.atoms).tolist()) / m.C


def _check_disjoint(parts: Sequence[SetDescriptor]) -> None:
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            if parts[a].overlaps(parts[b]):
                raise OverlappingParts(f"{parts[a].describe()} overlaps {parts[b].describe()}")


def partition_counts(m: EmpiricalMeasure, parts: Sequence[SetDescriptor]):
    """(atom count, atoms on the boundary) per part."""
    _check_disjoint(parts)
    return [(int(p.contains(m.system, m.atoms).sum()), int(p.on_boundary(m.system, m.atoms).sum()))
            for p in parts]


def partition_masses(m: EmpiricalMeasure, parts: Sequence[SetDescriptor]) -> list[float]:
    """Fraction of atoms in each (pairwise disjoint) part."""
    return [float(Fraction(c, m.C)) for c, _ in partition_counts(m, parts)]


def lebesgue_discrepancy(m: EmpiricalMeasure, parts: Sequence[SetDescriptor]) -> float:
    """max |mass(part) - length(part)|."""
    if isinstance(m.system, Sft):
        raise UnsupportedSystem("Lebesgue comparison needs a circle or interval system")
    masses = partition_masses(m, parts)
    return max(abs(w - p.length) for w, p in zip(masses, parts))


# ---------------------------------------------------------------------------
# building measures


def sft_optimal_set(sys: Sft, k: int, n: int, *, extension: int = 1,
                    pick: str = "first") -> SeparatedSet:
    """One word per admissible prefix of length n + k, extended by ``extension`` symbols.

    ``pick`` chooses the lexicographically first or last extension, giving
    distinct optimal sets with the same prefixes.
    """
    L = n + k
    words = sys.enumerate_words(L + extension)
    keys = words[:, :L]
    change = np.ones(len(words), dtype=bool)
    change[1:] = (keys[1:] != keys[:-1]).any(axis=1)
    starts = np.flatnonzero(change)
    if pick == "first":
        idx = starts
    elif pick == "last":
        idx = np.append(starts[1:], len(words)) - 1
    else:
        raise ValueError("pick must be 'first' or 'last'")
    return SeparatedSet(sys, words[idx], 2.0 ** -k, n, CLOSED_FORM,
                        {"formula": "admissible words of length n+k", "extension": extension,
                         "pick": pick})


def measure_sequence(
    sys: System,
    eps: float,
    n_range: Iterable[int],
    cands: CandidateSet | None = None,
    budget: int = 1_000_000,
    *,
    approximate: bool = False,
    closed_form: bool = True,
    extension: int = 1,
) -> list[EmpiricalMeasure]:
    """One empirical measure per n.

    Subshifts at dyadic eps use the complete word enumeration; IETs use the
    cell midpoints of the D_n partition once n reaches the measured n_0
    (when ``closed_form``); everything else takes exact maximum independent
    sets on ``cands``.  Greedy-only sets raise NotOptimal unless
    ``approximate``.
    """
    ns = sorted({int(n) for n in n_range})
    out = []
    k = dyadic_exponent(eps)
    if isinstance(sys, Sft) and k is not None:
        return [EmpiricalMeasure.from_set(sft_optimal_set(sys, k, n, extension=extension),
                                          verify=False) for n in ns]
    mis_ns = ns
    if isinstance(sys, Iet) and closed_form:
        n0 = iet_n0(sys, eps)
        mis_ns = [n for n in ns if n < n0]
    sets = {}
    if mis_ns:
        curve = complexity_curve(sys, eps, mis_ns, cands, budget, keep_sets=True)
        sets.update(curve.sets)
    for n in ns:
        if n in sets:
            s = sets[n]
        else:
            pts = iet_closed_form_set(sys, n)
            s = SeparatedSet(sys, pts, eps, n, CLOSED_FORM, {"formula": "(m-1)(n-1)+1", "n0": n0})
            assert len(s) == iet_complexity_closed_form(sys.m, n)
        out.append(EmpiricalMeasure.from_set(s, approximate=approximate))
    return out


# ---------------------------------------------------------------------------
# invariance


@dataclass
class DefectTable:
    value: float
    rows: list[tuple[str, float, float, float]]  # (phi, I(phi), I(phi o f), normalised defect)


def invariance_defect(sys: System, m: EmpiricalMeasure, Phi: Sequence[TestFunction]) -> DefectTable:
    """max over phi of |I(phi) - I(phi o f)| / (1 + ||phi||)."""
    if sys.singular_set and (sys.singular_distance_array(m.atoms) == 0).any():
        raise SingularAtom("an atom lies on the singular set")
    image = sys.step_array(m.atoms)
    rows = []
    for phi in Phi:
        a = math.fsum(phi(sys, m.atoms).tolist()) / m.C
        b = math.fsum(phi(sys, image).tolist()) / m.C
        rows.append((phi.name, a, b, abs(a - b) / (1.0 + phi.sup_norm)))
    return DefectTable(max(r[3] for r in rows), rows)


def singular_mass(sys: System, ms: Sequence[EmpiricalMeasure], profile: ExpansivityProfile,
                  factor: float = 1.0) -> list[float]:
    """Per measure, the fraction of atoms within factor * delta_hat_n of S (0 when S is empty)."""
    out = []
    for m in ms:
        if not sys.singular_set:
            out.append(0.0)
            continue
        radius = factor * profile.delta(m.n)
        inside = sys.singular_distance_array(m.atoms) < radius
        out.append(float(Fraction(int(inside.sum()), m.C)))
    return out


@dataclass
class InvarianceBudget:
    """Terms of the effective bound on |I(phi) - I(phi o f)| at one n."""

    n: int
    phi: str
    defect: float
    omega_delta: float
    omega_eta: float
    singular_term: float
    growth_term: float

    @property
    def bound(self) -> float:
        return self.omega_delta + self.omega_eta + self.singular_term + self.growth_term

    @property
    def holds(self) -> bool:
        return self.defect <= self.bound + 1e-12


def invariance_budget(sys: System, m: EmpiricalMeasure, phi: TestFunction, *,
                      delta_hat: float, q_n: float, cands: CandidateSet) -> InvarianceBudget:
    """omega_delta(phi) + omega_{eta(delta)}(phi) + 2||phi|| mass(O_{2 delta}(S)) + 3||phi|| q_n.

    eta is the sampled continuity modulus of f at sigma = delta away from
    the 2 delta-neighbourhood of S.
    """
    delta = max(delta_hat, 1e-300)
    (_, eta), = continuity_modulus(sys, [delta], 2 * delta, cands)
    near = 0.0
    if sys.singular_set:
        near = float(Fraction(int((sys.singular_distance_array(m.atoms) < 2 * delta).sum()), m.C))
    image = sys.step_array(m.atoms)
    defect = abs(math.fsum(phi(sys, m.atoms).tolist()) - math.fsum(phi(sys, image).tolist())) / m.C
    norm = phi.sup_norm
    return InvarianceBudget(m.n, phi.name, defect, phi.modulus(delta_hat), phi.modulus(eta),
                            2 * norm * near, 3 * norm * q_n)


@dataclass
class IndependenceCheck:
    gap: float
    bound: float
    matched_max: float
    ok: bool


def optimal_set_independence(sys: System, eps: float, n: int, A: SeparatedSet, B: SeparatedSet,
                             phi: TestFunction, *, delta_hat: float,
                             tol: float = 1e-12) -> IndependenceCheck:
    """|I_A(phi) - I_B(phi)| against L * delta_hat_n.

    delta_hat must come from an expansivity profile whose sample contains
    A and B, so every matched pair lies inside it.
    """
    for s in (A, B):
        if not s.is_optimal:
            raise NotOptimal(f"set with status {s.status}")
        if s.eps != eps or s.n != n:
            raise EpsnError("set parameters differ from (eps, n)")
    if phi.lipschitz is None:
        raise EpsnError("test function needs a Lipschitz bound")
    ia = math.fsum(phi(sys, A.points).tolist()) / len(A)
    ib = math.fsum(phi(sys, B.points).tolist()) / len(B)
    inj = hall_injection(sys, B, A)
    matched = 0.0 if inj.found else math.inf
    if inj.found and inj.mapping:
        b_idx = np.fromiter(inj.mapping.keys(), dtype=np.int64)
        a_idx = np.fromiter(inj.mapping.values(), dtype=np.int64)
        matched = float(sys.dist_array(B.points[b_idx], A.points[a_idx]).max())
    gap = abs(ia - ib)
    bound = phi.lipschitz * delta_hat
    return IndependenceCheck(gap, bound, matched, gap <= bound + tol)


def isometry_invariance_defect(sys: System, m: EmpiricalMeasure, omega: float,
                               parts: Sequence[Interval]) -> float:
    """max |mass(P) - mass(P + omega)| over the parts."""
    if not isinstance(sys, Doubling):
        raise UnsupportedSystem(f"{sys.kind} has no commuting rotation group")
    before = partition_masses(m, parts)
    after = partition_masses(m, [p.shifted(omega) for p in parts])
    return max(abs(a - b) for a, b in zip(before, after))


# ---------------------------------------------------------------------------
# Markov chain law


@dataclass
class PerronData:
    lam: float
    e: np.ndarray
    residual: float
    iterations: int


def is_primitive(M) -> bool:
    A = (np.asarray(M) > 0).astype(np.int64)
    p = len(A)
    P = A.copy()
    for _ in range(p * p):
        if (P > 0).all():
            return True
        P = ((P @ A) > 0).astype(np.int64)
    return False


def perron(M, tol: float = 1e-12, max_iter: int = 1_000_000) -> PerronData:
    """Leading eigenvalue and right eigenvector (sum 1) by power iteration."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or (A < 0).any():
        raise NotPrimitive("need a square nonnegative matrix")
    if not is_primitive(A):
        raise NotPrimitive("no power of M is entrywise positive")
    e = np.full(len(A), 1.0 / len(A))
    lam, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        w = A @ e
        lam = float(w.sum())
        e_new = w / lam
        res = float(np.abs(A @ e_new - lam * e_new).max())
        e = e_new
        if res <= tol:
            break
    else:
        raise NoConvergence(f"residual {res:.3g} after {max_iter} iterations")
    permutation = (A.sum(axis=0) == 1).all() and (A.sum(axis=1) == 1).all()
    if not permutation and not lam > 1.0:
        raise NotPrimitive(f"leading eigenvalue {lam} <= 1")
    return PerronData(lam, e, res, it)


@dataclass
class CylinderPrediction:
    word: tuple[int, ...]
    absolute: float  # lambda^{-n} e_i, reported but not asserted

    def ratio(self, other: "CylinderPrediction") -> float:
        return self.absolute / other.absolute


def _check_word(word, sys: Sft | None):
    word = tuple(int(s) for s in word)
    if not word:
        raise InadmissibleWord("empty word")
    if sys is not None and not sys.is_admissible(word):
        raise InadmissibleWord(f"{word} is not admissible")
    return word


def cylinder_prediction(pd: PerronData, word, sys: Sft | None = None) -> CylinderPrediction:
    """lambda^{-n} e_i for the cylinder of length n ending in i.

    Only ratios are meaningful: same-length cylinders compare as e_i / e_j and
    a one-symbol extension C.a scales by e_a / (lambda e_i).
    """
    word = _check_word(word, sys)
    return CylinderPrediction(word, pd.lam ** -len(word) * float(pd.e[word[-1]]))


def same_length_ratio(pd: PerronData, w1, w2, sys: Sft | None = None) -> float:
    w1, w2 = _check_word(w1, sys), _check_word(w2, sys)
    if len(w1) != len(w2):
        raise ValueError("cylinders must have the same length")
    return float(pd.e[w1[-1]] / pd.e[w2[-1]])


def extension_ratio(pd: PerronData, word, a: int, sys: Sft | None = None) -> float:
    word = _check_word(tuple(word) + (a,), sys)[:-1]
    return float(pd.e[a] / (pd.lam * pd.e[word[-1]]))


def preimage_ratio(m: EmpiricalMeasure, symbol: int = 0) -> float:
    """mu(f^{-1}[s]) / mu([s]) on a subshift measure."""
    if not isinstance(m.system, Sft):
        raise UnsupportedSystem("needs a subshift")
    pre = (m.atoms[:, 1] == symbol).sum()
    base = (m.atoms[:, 0] == symbol).sum()
    return float(pre / base)


def circle_masses(m: EmpiricalMeasure) -> tuple[float, float]:
    """Masses of circle 0 and circle 1 of the two-circle space."""
    if not isinstance(m.system, TwoCircle):
        raise UnsupportedSystem("needs the two-circle map")
    a, b = partition_masses(m, [LabeledInterval(0), LabeledInterval(1)])
    return a, b
