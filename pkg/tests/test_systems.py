import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epsn.errors import (
    EmptyCandidateSet,
    HorizonExhausted,
    InvalidPoint,
    InvalidSystem,
    SingularPoint,
)
from epsn.systems import (
    Circle,
    Doubling,
    Iet,
    Labeled,
    Rotation,
    Sft,
    TwoCircle,
    Word,
    _grid_pairs,
    _stats_1d,
    apply,
    candidates,
    distance,
    preimages,
    singular_distance,
    system_from_json,
)

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


# --- single steps ------------------------------------------------------------

def test_apply_examples(toy_iet):
    assert apply(toy_iet, Circle(0.1)).x == pytest.approx(0.7)
    assert apply(Doubling(), Circle(0.75)) == Circle(0.5)
    assert apply(Sft.golden_mean(), Word.parse("0100")) == Word.parse("100")


def test_apply_errors(toy_iet):
    with pytest.raises(SingularPoint):
        apply(toy_iet, Circle(0.4))
    with pytest.raises(HorizonExhausted):
        apply(Sft.full(2), Word.parse("1"))
    with pytest.raises(InvalidPoint):
        apply(Doubling(), Circle(1.0))
    with pytest.raises(InvalidPoint):
        apply(Sft.golden_mean(), Word.parse("11"))
    with pytest.raises(InvalidPoint):
        apply(TwoCircle(), Labeled(2, 0.1))


def test_distance_examples():
    assert distance(Doubling(), Circle(0.1), Circle(0.9)) == pytest.approx(0.2)
    assert distance(Sft.full(2), Word.parse("0101"), Word.parse("0100")) == 0.125
    assert distance(TwoCircle(), Labeled(0, 0.3), Labeled(1, 0.3)) == 1.0
    assert distance(TwoCircle(), Labeled(1, 0.1), Labeled(1, 0.95)) == pytest.approx(0.15)


def test_word_distance_needs_a_common_horizon():
    with pytest.raises(HorizonExhausted):
        distance(Sft.full(2), Word.parse("01"), Word.parse("010"))


def test_preimage_examples(toy_iet):
    assert preimages(Doubling(), Circle(0.5)) == [Circle(0.25), Circle(0.75)]
    assert preimages(Sft.golden_mean(), Word.parse("10")) == [Word.parse("010")]
    assert preimages(Sft.golden_mean(), Word.parse("01")) == [Word.parse("001"), Word.parse("101")]
    (q,) = preimages(toy_iet, Circle(0.7))
    assert q.x == pytest.approx(0.1)
    assert len(preimages(TwoCircle(), Labeled(1, 0.2))) == 3


def test_singular_distance_examples(toy_iet):
    assert singular_distance(toy_iet, Circle(0.5)) == pytest.approx(0.1)
    assert singular_distance(toy_iet, Circle(0.4)) == 0.0
    assert singular_distance(Doubling(), Circle(0.3)) == math.inf


@given(unit)
def test_preimages_map_back(x):
    for sys in (Doubling(), Rotation(0.3819660112501051)):
        for q in preimages(sys, Circle(x)):
            assert sys.distance(sys.apply(q), Circle(x)) < 1e-12


@given(unit)
def test_iet_preimage_round_trip(x):
    iet = Iet((0.0, 0.29289321881345254, 0.6180339887498949, 1.0),
              (0.7071067811865475, 0.08907279243665256, -0.6180339887498949))
    (q,) = iet.preimages(Circle(x))
    if q.x not in iet.singular_set:
        assert abs(iet.apply(q).x - x) < 1e-12


def test_iet_is_a_bijection_on_a_grid(iet):
    n = 100_000
    x = (np.arange(n) + 0.5) / n
    y = iet.step_array(x)
    assert len(np.unique(y)) == n
    assert y.min() >= 0.0 and y.max() < 1.0
    back = np.array([iet.preimages(Circle(float(v)))[0].x for v in y[::997]])
    assert np.allclose(back, x[::997], atol=1e-12)
    # Lebesgue measure is preserved: each tenth of [0, 1) receives n/10 images, up to
    # one point per piece boundary
    counts = np.bincount(np.floor(y * 10).astype(int), minlength=10)
    assert np.abs(counts - n // 10).max() <= 2 * iet.m


def test_iet_from_permutation_matches_data(iet):
    lengths = np.diff(iet.a)
    rebuilt = Iet.from_permutation(lengths, [2, 1, 0])
    assert np.allclose(rebuilt.a, iet.a) and np.allclose(rebuilt.c, iet.c)


@pytest.mark.parametrize("a,c", [
    ((0.0, 0.5, 1.0), (0.5, 0.5)),          # equal neighbouring translations
    ((0.0, 0.4, 1.0), (0.6, -0.3)),         # images do not tile
    ((0.0, 0.6, 0.4, 1.0), (0.1, 0.2, 0.3)),
    ((0.0, 1.0), (0.0,)),
])
def test_invalid_iets(a, c):
    with pytest.raises(InvalidSystem):
        Iet(a, c)


def test_invalid_systems():
    with pytest.raises(InvalidSystem):
        Sft(((1, 2), (1, 1)))
    with pytest.raises(InvalidSystem):
        Sft(((1, 1),))
    with pytest.raises(InvalidSystem):
        Rotation(1.2)
    with pytest.raises(InvalidSystem):
        system_from_json({"kind": "tent"})


def test_system_json_round_trip(iet):
    for sys in (Doubling(), Rotation(0.25), TwoCircle(), iet, Sft.golden_mean()):
        assert system_from_json(sys.to_json()) == sys


# --- candidate sets ------------------------------------------------------------

def test_word_enumeration_counts():
    assert len(Sft.full(2).enumerate_words(3)) == 8
    golden = Sft.golden_mean()
    words = golden.enumerate_words(4)
    assert len(words) == 8
    assert all(golden.is_admissible(w) for w in words)
    assert len({tuple(w) for w in words}) == 8


def test_doubling_grid():
    c = candidates(Doubling(), 10, 1, seed=0)
    assert len(c) == 10
    d = np.sort(c.points)
    assert np.allclose(np.diff(d), 0.1)
    assert (d[0] + 1.0 - d[-1]) == pytest.approx(0.1)


def test_candidates_are_seeded():
    a = candidates(Doubling(), 50, 1, seed=3).points
    b = candidates(Doubling(), 50, 1, seed=3).points
    c = candidates(Doubling(), 50, 1, seed=4).points
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_iet_candidates_avoid_singular_preimages(iet):
    c = candidates(iet, 5000, 6, seed=0)
    bad = iet.singular_preimages(4)
    gap = np.abs(c.points[:, None] - bad[None, :]).min()
    assert gap > c.exclusion_radius


def test_empty_candidate_set():
    with pytest.raises(EmptyCandidateSet):
        candidates(Sft(((0, 1), (0, 0))), 1, 3, seed=0)


# --- pair search against brute force -------------------------------------------

def _brute_pairs(sys, arr, radius, inclusive):
    n = len(arr)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            d = float(sys.dist_array(arr[i:i + 1], arr[j:j + 1])[0])
            if d <= radius if inclusive else d < radius:
                out.add((i, j))
    return out


@pytest.mark.parametrize("sys", [Doubling(), Iet((0.0, 0.4, 1.0), (0.6, -0.4)), TwoCircle()])
def test_close_pairs_and_stats_match_brute_force(sys):
    rng = np.random.default_rng(11)
    for trial in range(30):
        n = int(rng.integers(2, 40))
        if isinstance(sys, TwoCircle):
            arr = np.column_stack([rng.integers(0, 2, n).astype(float), rng.random(n)])
        else:
            arr = rng.random(n)
        r = float(rng.choice([0.01, 0.05, 0.2, 0.5, 0.7, 1.0]))
        for inclusive in (False, True):
            i, j = sys.close_pairs(arr, r, inclusive=inclusive)
            assert set(zip(i.tolist(), j.tolist())) == _brute_pairs(sys, arr, r, inclusive)
        count, dmax = sys.close_stats(arr, r)
        pairs = _brute_pairs(sys, arr, r, True)
        assert count == len(pairs)
        best = max((float(sys.dist_array(arr[a:a + 1], arr[b:b + 1])[0]) for a, b in pairs),
                   default=0.0)
        assert dmax == pytest.approx(best, abs=1e-12)


def test_sft_close_stats_match_brute_force():
    rng = np.random.default_rng(4)
    for sys in (Sft.full(2), Sft.golden_mean(), Sft.full(3)):
        words = sys.enumerate_words(6)
        for _ in range(10):
            sub = words[rng.choice(len(words), size=min(len(words), int(rng.integers(2, 40))), replace=False)]
            r = float(rng.choice([1.0, 0.5, 0.3, 0.125, 0.01]))
            pairs = _brute_pairs(sys, sub, r, True)
            count, dmax = sys.close_stats(sub, r)
            assert count == len(pairs)
            best = max((float(sys.dist_array(sub[a], sub[b])) for a, b in pairs), default=0.0)
            assert dmax == best


@given(st.lists(unit, min_size=2, max_size=30), st.floats(0.001, 0.6))
def test_stats_1d_matches_brute_force(xs, r):
    x = np.array(xs)
    for wrap in (False, True):
        d = np.abs(x[:, None] - x[None, :])
        if wrap:
            d = np.minimum(d, 1.0 - d)
        iu = np.triu_indices(len(x), 1)
        close = d[iu] <= r
        count, best = _stats_1d(x, r, wrap)
        assert count == int(close.sum())
        assert best == pytest.approx(float(d[iu][close].max()) if close.any() else 0.0, abs=1e-12)


@pytest.mark.parametrize("periodic", [True, False])
def test_grid_pairs_is_a_superset_of_close_pairs(periodic):
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 200))
        k = int(rng.integers(1, 4))
        coords = [rng.random(n) for _ in range(k)]
        r = float(rng.choice([0.003, 0.02, 0.1, 0.3]))
        i, j = _grid_pairs(coords, r, periodic)
        got = set(zip(i.tolist(), j.tolist()))
        assert len(got) == len(i)
        for a in range(n):
            for b in range(a + 1, n):
                ds = [abs(c[a] - c[b]) for c in coords]
                if periodic:
                    ds = [min(d, 1 - d) for d in ds]
                if max(ds) <= r:
                    assert (a, b) in got


def test_preimage_spread():
    # the preimages of one point are at least 1/2 (doubling), 1/3 (tripling circle) apart
    for x in np.linspace(0, 0.99, 37):
        p = preimages(Doubling(), Circle(float(x)))
        assert distance(Doubling(), *p) == pytest.approx(0.5)
        q = preimages(TwoCircle(), Labeled(1, float(x)))
        ds = [TwoCircle().distance(a, b) for a in q for b in q if a != b]
        assert min(ds) == pytest.approx(1 / 3)
    words = preimages(Sft.full(2), Word.parse("0110"))
    assert distance(Sft.full(2), *words) == 1.0
