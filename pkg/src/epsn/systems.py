"""Dynamical systems, their metrics, and candidate point generation.

Five built-in systems are provided: the doubling map and an irrational-like
rotation of the circle, the two-circle map (doubling on one circle, tripling
on the other), interval exchange transformations, and subshifts of finite
type given by a 0/1 transition matrix.

Every system exposes a scalar API on :class:`Circle`, :class:`Labeled` and
:class:`Word` points, plus a vectorised "array" API used by the bulk
computations (orbit tables, closeness graphs, measures):

* circle maps and IETs: float array of shape ``(N,)``
* two-circle map: float array of shape ``(N, 2)`` holding ``(label, x)``
* subshifts: int8 array of shape ``(N, L)``, one admissible word per row
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import ClassVar, Sequence

import numpy as np

from .errors import (
    EmptyCandidateSet,
    HorizonExhausted,
    InvalidPoint,
    InvalidSystem,
    NotInImage,
    SingularPoint,
)

DEFAULT_EXCLUSION_RADIUS = 1e-9
_ONE_MINUS = math.nextafter(1.0, 0.0)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class Circle:
    x: float


@dataclass(frozen=True)
class Labeled:
    i: int
    x: float


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]

    @property
    def horizon(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols)

    @classmethod
    def parse(cls, text: str) -> "Word":
        return cls(tuple(int(ch) for ch in text))


PhasePoint = Circle | Labeled | Word


def _circle_dist(x, y):
    g = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.minimum(g, 1.0 - g)


def _wrap01(y: float) -> float:
    y = y % 1.0
    return _ONE_MINUS if y >= 1.0 else y


def _pairs_1d(x: np.ndarray, radius: float, inclusive: bool, wrap: bool):
    """Index pairs (i < j) of a 1-D point cloud whose forward gap is below ``radius``.

    Scans sorted offsets k = 1, 2, ... and stops once no forward gap at offset
    k qualifies; forward gaps are non-decreasing in k.
    """
    n = len(x)
    if n < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    base = np.arange(n)
    found_i, found_j = [], []
    for k in range(1, n):
        if wrap:
            other = (base + k) % n
            gap = (xs[other] - xs) % 1.0
            src = base
        else:
            other = base[k:]
            src = base[:-k]
            gap = xs[k:] - xs[:-k]
        mask = gap <= radius if inclusive else gap < radius
        if not mask.any():
            break
        found_i.append(order[src[mask]])
        found_j.append(order[other[mask]])
    if not found_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    i = np.concatenate(found_i)
    j = np.concatenate(found_j)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    keys = np.unique(lo.astype(np.int64) * n + hi)
    return keys // n, keys % n


def _stats_1d(x: np.ndarray, radius: float, wrap: bool) -> tuple[int, float]:
    """(number of pairs, largest distance) over pairs at distance <= radius, without listing them."""
    n = len(x)
    if n < 2:
        return 0, 0.0
    xs = np.sort(x)
    if wrap and radius >= 0.5:
        # every pair qualifies; the farthest partner of x sits nearest x + 1/2
        target = (xs + 0.5) % 1.0
        pos = np.searchsorted(xs, target) % n
        near = np.minimum(_circle_dist(xs[pos], target), _circle_dist(xs[pos - 1], target))
        return n * (n - 1) // 2, float(0.5 - near.min())
    ext = np.concatenate([xs, xs + 1.0]) if wrap else xs
    last = np.searchsorted(ext, xs + radius, side="right") - 1
    if wrap:
        last = np.minimum(last, np.arange(n) + n - 1)
    count = last - np.arange(n)
    if count.sum() == 0:
        return 0, 0.0
    gaps = ext[last] - xs
    return int(count.sum()), float(gaps[count > 0].max())


def _ragged(starts: np.ndarray, counts: np.ndarray):
    """(owner, value) for the concatenation of ranges starts[k] .. starts[k] + counts[k]."""
    owner = np.repeat(np.arange(len(counts)), counts)
    first = np.cumsum(counts) - counts
    return owner, starts[owner] + np.arange(int(counts.sum())) - first[owner]


_SPAN = 4


def _grid_pairs(coords: Sequence[np.ndarray], radius: float, periodic: bool):
    """Index pairs (i < j) that may satisfy |c_t(i) - c_t(j)| <= radius for every t.

    Cell join: points are bucketed by cells of width >= radius / _SPAN in
    each coordinate in turn, and only pairs of buckets whose cells are at
    most _SPAN apart survive each refinement.  The result is a superset of the close
    pairs (callers re-check distances exactly).
    """
    n = len(coords[0])
    empty = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    if n < 2:
        return empty
    # slightly wider cells so rounding never puts close points two cells apart
    w = radius * (1.0 + 1e-9) + 1e-300
    gid = np.zeros(n, dtype=np.int64)
    pa = np.zeros(1, dtype=np.int64)
    pb = np.zeros(1, dtype=np.int64)
    for x in coords:
        x = np.asarray(x, dtype=float)
        if periodic:
            K = int(math.floor(_SPAN / w))
            if K <= 2 * _SPAN + 1:
                continue
            code = np.floor(x * K).astype(np.int64) % K
        else:
            code = np.floor(x * (_SPAN / w)).astype(np.int64)
            code -= code.min()
            K = int(code.max()) + 1
        keys, gid = np.unique(gid * K + code, return_inverse=True)
        gid = gid.reshape(-1)
        parent, sub = keys // K, keys % K
        first = np.searchsorted(parent, np.arange(int(parent[-1]) + 2))
        counts = np.diff(first)
        owner, a = _ragged(first[pa], counts[pa])
        new_a, new_b = [], []
        for delta in range(-_SPAN, _SPAN + 1):
            t = sub[a] + delta
            if periodic:
                t %= K
            target = pb[owner] * K + t
            pos = np.minimum(np.searchsorted(keys, target), len(keys) - 1)
            hit = keys[pos] == target
            if not periodic:
                hit &= (t >= 0) & (t < K)
            na, nb = a[hit], pos[hit]
            self_pair = pa[owner[hit]] == pb[owner[hit]]
            keep = ~self_pair | (na <= nb)
            new_a.append(na[keep])
            new_b.append(nb[keep])
        pa, pb = np.concatenate(new_a), np.concatenate(new_b)
        if len(pa) == 0:
            return empty

    order = np.argsort(gid, kind="stable")
    start = np.searchsorted(gid[order], np.arange(int(gid.max()) + 2))
    size = np.diff(start)
    sa, sb = size[pa], size[pb]
    owner, k = _ragged(np.zeros(len(pa), dtype=np.int64), sa * sb)
    ia = order[start[pa[owner]] + k // sb[owner]]
    ib = order[start[pb[owner]] + k % sb[owner]]
    keep = ia != ib
    same = pa[owner] == pb[owner]
    keep &= ~same | (ia < ib)
    i, j = np.minimum(ia[keep], ib[keep]), np.maximum(ia[keep], ib[keep])
    o = np.lexsort((j, i))
    return i[o], j[o]


# ---------------------------------------------------------------------------
# systems


class System:
    """Common interface of the built-in systems."""

    kind: ClassVar[str] = ""
    point_type: ClassVar[type] = Circle

    # scalar API -----------------------------------------------------------
    def apply(self, p: PhasePoint) -> PhasePoint:
        raise NotImplementedError

    def distance(self, p: PhasePoint, q: PhasePoint) -> float:
        raise NotImplementedError

    def preimages(self, p: PhasePoint) -> list[PhasePoint]:
        raise NotImplementedError

    def validate_point(self, p: PhasePoint) -> None:
        if not isinstance(p, self.point_type):
            raise InvalidPoint(f"{self.kind} expects {self.point_type.__name__} points, got {p!r}")
        if isinstance(p, (Circle, Labeled)) and not (0.0 <= p.x < 1.0):
            raise InvalidPoint(f"coordinate {p.x} outside [0, 1)")

    @property
    def singular_set(self) -> tuple[float, ...]:
        return ()

    def singular_distance(self, p: PhasePoint) -> float:
        return math.inf

    # array API ------------------------------------------------------------
    def to_array(self, points: Sequence[PhasePoint]) -> np.ndarray:
        return np.array([p.x for p in points], dtype=float)

    def from_array(self, arr: np.ndarray) -> list[PhasePoint]:
        return [Circle(float(v)) for v in arr]

    def point_at(self, arr: np.ndarray, i: int) -> PhasePoint:
        return Circle(float(arr[i]))

    def step_array(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dist_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _circle_dist(a, b)

    def singular_distance_array(self, arr: np.ndarray) -> np.ndarray:
        return np.full(len(arr), math.inf)

    def close_pairs(self, arr: np.ndarray, radius: float, inclusive: bool = False):
        """All index pairs (i < j) with base distance ``< radius`` (``<=`` if inclusive)."""
        return _pairs_1d(np.asarray(arr, dtype=float), radius, inclusive, wrap=True)

    def close_stats(self, arr: np.ndarray, radius: float) -> tuple[int, float]:
        """(count, max distance) of the pairs at base distance <= radius."""
        if self._periodic is not None:
            return _stats_1d(np.asarray(arr, dtype=float), radius, wrap=self._periodic)
        i, j = self.close_pairs(arr, radius, inclusive=True)
        return len(i), float(self.dist_array(arr[i], arr[j]).max()) if len(i) else 0.0

    def orbit_pairs(self, states: Sequence[np.ndarray], radius: float):
        """Index pairs (i < j) with d(f^t x_i, f^t x_j) <= radius for every stored t.

        A superset is allowed (callers re-check exactly).
        """
        return _grid_pairs(states, radius, periodic=self._periodic)

    _periodic: ClassVar[bool | None] = True

    def coordinate(self, arr: np.ndarray) -> np.ndarray:
        """A real coordinate in [0, 1) per point, used by trigonometric test functions."""
        return np.asarray(arr, dtype=float)

    def grid(self, resolution: int, rng: np.random.Generator) -> np.ndarray:
        return (np.arange(resolution) + rng.random()) / resolution

    def to_json(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Doubling(System):
    """x -> 2x mod 1 on the circle of circumference one."""

    kind: ClassVar[str] = "doubling"

    def apply(self, p):
        self.validate_point(p)
        return Circle(_wrap01(2.0 * p.x))

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return float(_circle_dist(p.x, q.x))

    def preimages(self, p):
        self.validate_point(p)
        return [Circle(_wrap01(p.x / 2.0)), Circle(_wrap01(p.x / 2.0 + 0.5))]

    def step_array(self, arr):
        out = (2.0 * arr) % 1.0
        out[out >= 1.0] = _ONE_MINUS
        return out


@dataclass(frozen=True)
class Rotation(System):
    """x -> x + alpha mod 1; an isometry of the circle."""

    alpha: float
    kind: ClassVar[str] = "rotation"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidSystem(f"rotation number {self.alpha} outside (0, 1)")

    def apply(self, p):
        self.validate_point(p)
        return Circle(_wrap01(p.x + self.alpha))

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return float(_circle_dist(p.x, q.x))

    def preimages(self, p):
        self.validate_point(p)
        return [Circle(_wrap01(p.x - self.alpha))]

    def step_array(self, arr):
        out = (arr + self.alpha) % 1.0
        out[out >= 1.0] = _ONE_MINUS
        return out

    def to_json(self):
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class TwoCircle(System):
    """Disjoint union of two circles: doubling on circle 0, tripling on circle 1.

    Points on different circles are at distance 1; within a circle the
    standard circle metric is used.
    """

    kind: ClassVar[str] = "two_circle"
    point_type: ClassVar[type] = Labeled
    factors: ClassVar[tuple[int, int]] = (2, 3)

    def validate_point(self, p):
        super().validate_point(p)
        if p.i not in (0, 1):
            raise InvalidPoint(f"circle label {p.i} not in {{0, 1}}")

    def apply(self, p):
        self.validate_point(p)
        return Labeled(p.i, _wrap01(self.factors[p.i] * p.x))

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        if p.i != q.i:
            return 1.0
        return float(_circle_dist(p.x, q.x))

    def preimages(self, p):
        self.validate_point(p)
        k = self.factors[p.i]
        return [Labeled(p.i, _wrap01((p.x + r) / k)) for r in range(k)]

    def to_array(self, points):
        return np.array([[p.i, p.x] for p in points], dtype=float).reshape(-1, 2)

    def from_array(self, arr):
        return [Labeled(int(r[0]), float(r[1])) for r in arr]

    def point_at(self, arr, i):
        return Labeled(int(arr[i, 0]), float(arr[i, 1]))

    def step_array(self, arr):
        out = arr.copy()
        k = np.where(arr[:, 0] == 0, 2.0, 3.0)
        x = (k * arr[:, 1]) % 1.0
        x[x >= 1.0] = _ONE_MINUS
        out[:, 1] = x
        return out

    def dist_array(self, a, b):
        same = a[..., 0] == b[..., 0]
        return np.where(same, _circle_dist(a[..., 1], b[..., 1]), 1.0)

    def singular_distance_array(self, arr):
        return np.full(len(arr), math.inf)

    def close_pairs(self, arr, radius, inclusive=False):
        cross = radius >= 1.0 if inclusive else radius > 1.0
        if cross:
            i, j = np.triu_indices(len(arr), 1)
            return i.astype(np.int64), j.astype(np.int64)
        out_i, out_j = [], []
        for label in (0, 1):
            idx = np.flatnonzero(arr[:, 0] == label)
            i, j = _pairs_1d(arr[idx, 1], radius, inclusive, wrap=True)
            out_i.append(idx[i])
            out_j.append(idx[j])
        return np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64)

    def close_stats(self, arr, radius):
        if radius >= 1.0:
            n = len(arr)
            both = (arr[:, 0] == 0).any() and (arr[:, 0] == 1).any()
            best = 1.0 if both else _stats_1d(arr[:, 1], 0.5, wrap=True)[1]
            return n * (n - 1) // 2, best
        count, best = 0, 0.0
        for label in (0, 1):
            c, m = _stats_1d(arr[arr[:, 0] == label, 1], radius, wrap=True)
            count, best = count + c, max(best, m)
        return count, best

    def orbit_pairs(self, states, radius):
        labels = states[0][:, 0]
        if radius >= 1.0:
            i, j = np.triu_indices(len(labels), 1)
            return i.astype(np.int64), j.astype(np.int64)
        out_i, out_j = [], []
        for label in (0, 1):
            idx = np.flatnonzero(labels == label)
            i, j = _grid_pairs([s[idx, 1] for s in states], radius, periodic=True)
            out_i.append(idx[i])
            out_j.append(idx[j])
        return np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64)

    def coordinate(self, arr):
        return arr[:, 1]

    def grid(self, resolution, rng):
        u0, u1 = rng.random(2)
        base = np.arange(resolution)
        circle0 = np.column_stack([np.zeros(resolution), (base + u0) / resolution])
        circle1 = np.column_stack([np.ones(resolution), (base + u1) / resolution])
        return np.vstack([circle0, circle1])


@dataclass(frozen=True)
class Iet(System):
    """Interval exchange f(x) = x + c_i on [a_i, a_{i+1}).

    The phase space is the interval [0, 1) with the metric |x - y|.  The
    interior breakpoints a_1..a_{m-1} form the singular set.
    """

    a: tuple[float, ...]
    c: tuple[float, ...]
    kind: ClassVar[str] = "iet"
    tiling_tol: ClassVar[float] = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        a, c = self.a, self.c
        m = len(a) - 1
        if m < 2 or len(c) != m:
            raise InvalidSystem("need m >= 2 intervals and one translation per interval")
        if a[0] != 0.0 or a[-1] != 1.0 or any(a[i] >= a[i + 1] for i in range(m)):
            raise InvalidSystem(f"breakpoints {a} must increase from 0 to 1")
        if any(c[i] == c[i + 1] for i in range(m - 1)):
            raise InvalidSystem("adjacent translations must differ")
        images = sorted((a[i] + c[i], a[i + 1] + c[i]) for i in range(m))
        if abs(images[0][0]) > self.tiling_tol or abs(images[-1][1] - 1.0) > self.tiling_tol:
            raise InvalidSystem("translated intervals do not cover [0, 1)")
        for (_, hi), (lo, _) in zip(images, images[1:]):
            if abs(hi - lo) > self.tiling_tol:
                raise InvalidSystem("translated intervals overlap or leave a gap")

    @classmethod
    def from_permutation(cls, lengths: Sequence[float], perm: Sequence[int]) -> "Iet":
        """IET from interval lengths and the order ``perm`` of the images.

        ``perm[k]`` is the index of the interval placed k-th from the left.
        """
        lengths = [float(v) for v in lengths]
        total = sum(lengths)
        lengths = [v / total for v in lengths]
        a = [0.0] + list(itertools.accumulate(lengths))
        a[-1] = 1.0
        start = {}
        pos = 0.0
        for idx in perm:
            start[idx] = pos
            pos += lengths[idx]
        c = [start[i] - a[i] for i in range(len(lengths))]
        return cls(tuple(a), tuple(c))

    @property
    def m(self) -> int:
        return len(self.c)

    @property
    def singular_set(self):
        return self.a[1:-1]

    def _branch(self, x: float) -> int:
        return int(np.searchsorted(self.a, x, side="right")) - 1

    @staticmethod
    def _clamp(y: float) -> float:
        return min(max(y, 0.0), _ONE_MINUS)

    def apply(self, p):
        self.validate_point(p)
        if p.x in self.singular_set:
            raise SingularPoint(f"{p.x} is a breakpoint of the exchange")
        i = self._branch(p.x)
        return Circle(self._clamp(p.x + self.c[i]))

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        return abs(p.x - q.x)

    def preimages(self, p):
        self.validate_point(p)
        return [Circle(self._preimage(p.x))]

    def _preimage(self, y: float) -> float:
        for i in range(self.m):
            lo, hi = self.a[i] + self.c[i], self.a[i + 1] + self.c[i]
            if lo <= y < hi:
                return self._clamp(min(max(y - self.c[i], self.a[i]), self.a[i + 1]))
        raise NotInImage(f"{y} not covered by any translated interval")

    def singular_distance(self, p):
        return min(abs(p.x - s) for s in self.singular_set)

    def singular_preimages(self, depth: int) -> np.ndarray:
        """Sorted union of f^{-k} S for k = 0..depth (empty for depth < 0)."""
        pts = []
        for s in self.singular_set:
            y = s
            for k in range(depth + 1):
                if k:
                    y = self._preimage(y)
                pts.append(y)
        return np.unique(np.array(pts, dtype=float))

    def discontinuity_set(self, n: int) -> np.ndarray:
        """D_n: points whose orbit meets S within the first n - 1 steps."""
        return self.singular_preimages(n - 2)

    def partition(self, n: int) -> np.ndarray:
        """Endpoints 0 = b_0 < b_1 < ... < 1 of the intervals cut out by D_n."""
        return np.concatenate([[0.0], self.discontinuity_set(n), [1.0]])

    def step_array(self, arr):
        idx = np.searchsorted(self.a, arr, side="right") - 1
        idx = np.clip(idx, 0, self.m - 1)
        out = arr + np.asarray(self.c)[idx]
        return np.clip(out, 0.0, _ONE_MINUS)

    def dist_array(self, a, b):
        return np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))

    def singular_distance_array(self, arr):
        s = np.asarray(self.singular_set)
        return np.min(np.abs(np.asarray(arr)[:, None] - s[None, :]), axis=1)

    def close_pairs(self, arr, radius, inclusive=False):
        return _pairs_1d(np.asarray(arr, dtype=float), radius, inclusive, wrap=False)

    _periodic: ClassVar[bool | None] = False

    def to_json(self):
        return {"kind": self.kind, "a": list(self.a), "c": list(self.c)}


@dataclass(frozen=True)
class Sft(System):
    """One-sided subshift of finite type with the metric 2^{-first difference}."""

    M: tuple[tuple[int, ...], ...]
    kind: ClassVar[str] = "sft"
    point_type: ClassVar[type] = Word
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.M)
        object.__setattr__(self, "M", rows)
        p = len(rows)
        if p == 0 or any(len(r) != p for r in rows):
            raise InvalidSystem("transition matrix must be square and non-empty")
        if any(v not in (0, 1) for r in rows for v in r):
            raise InvalidSystem("transition matrix must be 0/1")
        object.__setattr__(self, "_matrix", np.array(rows, dtype=np.int64))

    @classmethod
    def full(cls, p: int) -> "Sft":
        return cls(tuple(tuple(1 for _ in range(p)) for _ in range(p)))

    @classmethod
    def golden_mean(cls) -> "Sft":
        return cls(((1, 1), (1, 0)))

    @property
    def p(self) -> int:
        return len(self.M)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix.copy()

    def is_admissible(self, symbols: Sequence[int]) -> bool:
        if any(not (0 <= s < self.p) for s in symbols):
            return False
        return all(self.M[s][t] for s, t in zip(symbols, symbols[1:]))

    def is_primitive(self) -> bool:
        m = self._matrix.astype(bool)
        power = m.copy()
        for _ in range(self.p * self.p):
            if power.all():
                return True
            power = (power.astype(np.int64) @ m.astype(np.int64)) > 0
        return bool(power.all())

    def validate_point(self, p):
        if not isinstance(p, Word):
            raise InvalidPoint(f"sft expects Word points, got {p!r}")
        if p.horizon < 1:
            raise HorizonExhausted("empty word")
        if not self.is_admissible(p.symbols):
            raise InvalidPoint(f"word {p} is not admissible")

    def apply(self, p):
        self.validate_point(p)
        if p.horizon < 2:
            raise HorizonExhausted("cannot shift a word of horizon 1")
        return Word(p.symbols[1:])

    def distance(self, p, q):
        self.validate_point(p)
        self.validate_point(q)
        for j, (s, t) in enumerate(zip(p.symbols, q.symbols)):
            if s != t:
                return 2.0 ** (-j)
        if p.horizon != q.horizon:
            raise HorizonExhausted("words agree on their common horizon but have different lengths")
        return 0.0

    def preimages(self, p):
        self.validate_point(p)
        out = [Word((a,) + p.symbols) for a in range(self.p) if self.M[a][p.symbols[0]]]
        if not out:
            raise NotInImage(f"no admissible symbol precedes {p.symbols[0]}")
        return out

    def to_array(self, points):
        if not points:
            return np.empty((0, 0), dtype=np.int8)
        lengths = {p.horizon for p in points}
        if len(lengths) != 1:
            raise InvalidPoint("all words in an array must share one horizon")
        return np.array([p.symbols for p in points], dtype=np.int8)

    def from_array(self, arr):
        return [Word(tuple(int(s) for s in row)) for row in arr]

    def point_at(self, arr, i):
        return Word(tuple(int(s) for s in arr[i]))

    def step_array(self, arr):
        if arr.shape[1] < 2:
            raise HorizonExhausted("cannot shift words of horizon 1")
        return arr[:, 1:]

    def dist_array(self, a, b):
        neq = a != b
        hit = neq.any(axis=-1)
        j = np.argmax(neq, axis=-1)
        return np.where(hit, 2.0 ** (-j.astype(float)), 0.0)

    @staticmethod
    def prefix_length(radius: float, inclusive: bool = False) -> int:
        """Smallest t >= 0 with 2^{-t} < radius (or <= radius)."""
        t = 0
        while not (2.0 ** (-t) <= radius if inclusive else 2.0 ** (-t) < radius):
            t += 1
            if t > 1100:
                break
        return t

    def close_pairs(self, arr, radius, inclusive=False):
        t = min(self.prefix_length(radius, inclusive), arr.shape[1])
        return prefix_groups_pairs(arr, t)

    _periodic: ClassVar[bool | None] = None

    def close_stats(self, arr, radius):
        # pairs within radius share the first t symbols; the farthest such pair
        # first differs at the smallest j >= t where some prefix group splits
        t = min(self.prefix_length(radius, inclusive=True), arr.shape[1])
        if len(arr) < 2:
            return 0, 0.0
        _, sizes = np.unique(arr[:, :t], axis=0, return_counts=True) if t else (None, [len(arr)])
        count = int(sum(int(s) * (int(s) - 1) // 2 for s in sizes))
        if count == 0:
            return 0, 0.0
        groups = len(sizes)
        for j in range(t, arr.shape[1]):
            finer = len(np.unique(arr[:, :j + 1], axis=0))
            if finer > groups:
                return count, 2.0 ** (-j)
            groups = finer
        return count, 0.0

    def orbit_pairs(self, states, radius):
        # close along k steps iff the words share k - 1 + t symbols
        k = len(states)
        t = min(k - 1 + self.prefix_length(radius, inclusive=True), states[0].shape[1])
        return prefix_groups_pairs(states[0], t)

    def coordinate(self, arr):
        """Real coordinate sum_i s_i p^{-(i+1)}; 1-Lipschitz for the word metric."""
        width = min(arr.shape[1], 40)
        weights = float(self.p) ** -np.arange(1, width + 1)
        return arr[:, :width].astype(float) @ weights

    def enumerate_words(self, length: int) -> np.ndarray:
        """All admissible words of the given length, in lexicographic order."""
        if length < 1:
            raise ValueError("word length must be >= 1")
        words = np.arange(self.p, dtype=np.int8).reshape(-1, 1)
        for _ in range(length - 1):
            last = words[:, -1].astype(np.int64)
            blocks = []
            for s in range(self.p):
                ok = self._matrix[last, s] == 1
                if ok.any():
                    ext = np.column_stack([words[ok], np.full(int(ok.sum()), s, dtype=np.int8)])
                    blocks.append(ext)
            words = np.vstack(blocks) if blocks else np.empty((0, words.shape[1] + 1), dtype=np.int8)
            words = words[np.lexsort(words.T[::-1])]
        return words

    def to_json(self):
        return {"kind": self.kind, "M": [list(r) for r in self.M]}


def prefix_groups_pairs(words: np.ndarray, t: int):
    """Index pairs (i < j) of rows sharing their first ``t`` symbols."""
    n = len(words)
    if n < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if t == 0:
        i, j = np.triu_indices(n, 1)
        return i.astype(np.int64), j.astype(np.int64)
    keys = words[:, :t]
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    boundary = np.ones(n, dtype=bool)
    boundary[1:] = (sk[1:] != sk[:-1]).any(axis=1)
    starts = np.flatnonzero(boundary)
    sizes = np.diff(np.append(starts, n))
    out_i, out_j = [], []
    for start, size in zip(starts[sizes > 1], sizes[sizes > 1]):
        a, b = np.triu_indices(size, 1)
        members = order[start:start + size]
        out_i.append(members[a])
        out_j.append(members[b])
    if not out_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    i = np.concatenate(out_i)
    j = np.concatenate(out_j)
    return np.minimum(i, j).astype(np.int64), np.maximum(i, j).astype(np.int64)


# ---------------------------------------------------------------------------
# module-level operations


def apply(sys: System, p: PhasePoint) -> PhasePoint:
    return sys.apply(p)


def distance(sys: System, p: PhasePoint, q: PhasePoint) -> float:
    return sys.distance(p, q)


def preimages(sys: System, p: PhasePoint) -> list[PhasePoint]:
    return sys.preimages(p)


def singular_distance(sys: System, p: PhasePoint) -> float:
    """d(p, S), or +inf when the map has no singular set."""
    return sys.singular_distance(p)


def system_from_json(spec: dict) -> System:
    kind = spec.get("kind")
    if kind == "doubling":
        return Doubling()
    if kind == "rotation":
        return Rotation(float(spec["alpha"]))
    if kind == "two_circle":
        return TwoCircle()
    if kind == "iet":
        return Iet(tuple(spec["a"]), tuple(spec["c"]))
    if kind == "sft":
        return Sft(tuple(tuple(r) for r in spec["M"]))
    raise InvalidSystem(f"unknown system kind {kind!r}")


# ---------------------------------------------------------------------------
# candidates


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Finite stand-in for the phase space minus the preimages of S."""

    system: System
    points: np.ndarray
    descriptor: dict
    exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS
    purge_depth: int = -1

    def __len__(self) -> int:
        return len(self.points)

    def point(self, i: int) -> PhasePoint:
        return self.system.point_at(self.points, i)

    def as_points(self) -> list[PhasePoint]:
        return self.system.from_array(self.points)

    def subset(self, idx) -> "CandidateSet":
        return CandidateSet(self.system, self.points[np.asarray(idx, dtype=np.int64)],
                            dict(self.descriptor, subset=True), self.exclusion_radius,
                            self.purge_depth)


def candidates(
    sys: System,
    resolution: int,
    n_max: int,
    seed: int,
    *,
    k_max: int = 0,
    guard: int = 1,
    word_length: int | None = None,
    exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS,
) -> CandidateSet:
    """Deterministic candidate points for ``sys``.

    Circle-type systems get a uniform grid of ``resolution`` points (per
    circle for the two-circle map) shifted by a seeded random phase, with
    points near f^{-j} S (j <= n_max - 2) removed.  Subshifts get every
    admissible word of length ``n_max + k_max + guard`` (or ``word_length``).
    """
    if resolution < 1 or n_max < 1:
        raise ValueError("resolution and n_max must be >= 1")
    if isinstance(sys, Sft):
        length = word_length if word_length is not None else n_max + k_max + guard
        words = sys.enumerate_words(length)
        if len(words) == 0:
            raise EmptyCandidateSet("no admissible words of the requested length")
        return CandidateSet(sys, words, {"word_length": length, "n_max": n_max})

    rng = np.random.default_rng(seed)
    pts = sys.grid(resolution, rng)
    depth = n_max - 2
    if isinstance(sys, Iet) and depth >= 0:
        bad = sys.singular_preimages(depth)
        pos = np.searchsorted(bad, pts)
        left = np.abs(pts - bad[np.clip(pos - 1, 0, len(bad) - 1)])
        right = np.abs(pts - bad[np.clip(pos, 0, len(bad) - 1)])
        pts = pts[np.minimum(left, right) > exclusion_radius]
    if len(pts) == 0:
        raise EmptyCandidateSet("purging removed every grid point")
    return CandidateSet(sys, pts, {"resolution": resolution, "seed": seed, "n_max": n_max},
                        exclusion_radius, depth)
