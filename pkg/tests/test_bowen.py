import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epsn.bowen import (
    bowen_distance,
    bowen_distance_array,
    continuity_modulus,
    expansivity_profile,
    is_separated,
    orbit,
    orbit_table,
    pair_times,
)
from epsn.errors import HorizonExhausted, SingularOrbit
from epsn.systems import Circle, Doubling, Iet, Rotation, Sft, TwoCircle, Word, candidates

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
CIRCLE_SYSTEMS = [Doubling(), Rotation(0.6180339887498949)]


def test_orbit_examples(toy_iet):
    assert [p.x for p in orbit(Doubling(), Circle(0.1), 3)] == pytest.approx([0.1, 0.2, 0.4])
    assert [str(w) for w in orbit(Sft.golden_mean(), Word.parse("0100"), 3)] == ["0100", "100", "00"]
    with pytest.raises(SingularOrbit):
        orbit(toy_iet, Circle(0.4), 2)
    with pytest.raises(HorizonExhausted):
        orbit(Sft.full(2), Word.parse("01"), 3)


def test_bowen_distance_examples():
    d = Doubling()
    assert bowen_distance(d, Circle(0.0), Circle(0.3), 2) == pytest.approx(0.4)
    assert bowen_distance(d, Circle(0.3), Circle(0.3), 5) == 0.0
    assert bowen_distance(Sft.full(2), Word.parse("0101"), Word.parse("0100"), 2) == 0.25
    assert is_separated(d, Circle(0.0), Circle(0.3), 0.35, 2)
    assert not is_separated(d, Circle(0.3), Circle(0.3), 1e-9, 4)


def test_sft_separation_boundary_by_brute_force():
    full = Sft.full(2)
    for k in range(0, 3):
        eps = 2.0 ** -k
        for n in range(1, 4):
            L = n + k + 1
            for x in itertools.product((0, 1), repeat=L):
                for j in range(L):
                    y = list(x)
                    y[j] ^= 1
                    sep = is_separated(full, Word(x), Word(tuple(y)), eps, n)
                    # differing first at j: separated iff j <= n + k - 1
                    assert sep == (j <= n + k - 1)


@given(unit, unit, unit, st.integers(1, 6))
def test_bowen_metric_axioms(x, y, z, n):
    for sys in CIRCLE_SYSTEMS:
        p, q, r = Circle(x), Circle(y), Circle(z)
        dpq = bowen_distance(sys, p, q, n)
        assert dpq == bowen_distance(sys, q, p, n)
        assert dpq <= bowen_distance(sys, p, r, n) + bowen_distance(sys, r, q, n) + 1e-12
        assert bowen_distance(sys, p, q, n + 1) >= dpq
        assert dpq >= sys.distance(p, q)


@given(st.lists(st.integers(0, 1), min_size=6, max_size=6), st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_sft_bowen_monotone_in_n(a, b):
    full = Sft.full(2)
    x, y = Word(tuple(a)), Word(tuple(b))
    ds = [bowen_distance(full, x, y, n) for n in range(1, 6)]
    assert ds == sorted(ds)


def _brute_times(sys, table, eps, strict):
    n = len(table)
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            tau = table.n_max
            for t in range(table.n_max):
                d = float(sys.dist_array(table.states[t][i:i + 1], table.states[t][j:j + 1])[0])
                if (d > eps) if strict else (d >= eps):
                    tau = t
                    break
            out[(i, j)] = tau
    return out


@pytest.mark.parametrize("sys", [Doubling(), Rotation(0.3819660112501051), TwoCircle(),
                                 Iet((0.0, 0.4, 1.0), (0.6, -0.4))])
def test_pair_times_match_brute_force(sys):
    rng = np.random.default_rng(2)
    for trial in range(12):
        size = int(rng.integers(3, 40))
        if isinstance(sys, TwoCircle):
            pts = np.column_stack([rng.integers(0, 2, size).astype(float), rng.random(size)])
        else:
            pts = rng.random(size)
        n_max = int(rng.integers(1, 6))
        table = orbit_table(sys, pts, n_max)
        eps = float(rng.choice([0.05, 0.1, 0.3]))
        strict = bool(trial % 2)
        brute = _brute_times(sys, table, eps, strict)
        for n_min in range(1, n_max + 1):
            pt = pair_times(table, eps, strict=strict, n_min=n_min)
            got = {(int(i), int(j)): int(t) for i, j, t in zip(pt.i, pt.j, pt.tau)}
            if n_min == 1:
                want = {k: v for k, v in brute.items() if v >= 1}
            else:
                want = {k: v for k, v in brute.items() if v >= n_min}
            assert got == want


def test_sft_pair_times_match_brute_force():
    golden = Sft.golden_mean()
    words = golden.enumerate_words(7)
    table = orbit_table(golden, words, 4)
    brute = _brute_times(golden, table, 0.25, False)
    for n_min in (1, 2, 4):
        pt = pair_times(table, 0.25, n_min=n_min)
        got = {(int(i), int(j)): int(t) for i, j, t in zip(pt.i, pt.j, pt.tau)}
        assert got == {k: v for k, v in brute.items() if v >= max(n_min, 1)}


def test_bowen_distance_array_matches_scalar():
    d = Doubling()
    pts = np.array([0.0, 0.3, 0.61, 0.9])
    table = orbit_table(d, pts, 4)
    i, j = np.triu_indices(4, 1)
    arr = bowen_distance_array(table, i, j, 4)
    for a, b, v in zip(i, j, arr):
        assert v == pytest.approx(bowen_distance(d, Circle(pts[a]), Circle(pts[b]), 4))


# --- profiles ----------------------------------------------------------------

@pytest.mark.parametrize("sys", [Sft.full(2), Sft.golden_mean(), Sft.full(3)])
def test_sft_profile_is_exact(sys):
    for k in (1, 2):
        eps = 2.0 ** -k
        cands = candidates(sys, 1, 8, 0, k_max=k + 1)
        prof = expansivity_profile(sys, eps, 8, cands)
        assert prof.delta_hat == [2.0 ** (1 - n) * eps for n in prof.n]


def test_sft_profile_matches_pair_scan():
    golden = Sft.golden_mean()
    words = candidates(golden, 1, 6, 0, k_max=2)
    prof = expansivity_profile(golden, 0.25, 6, words)
    table = orbit_table(golden, words, 6)
    i, j = np.triu_indices(len(words), 1)
    for n in prof.n:
        close = bowen_distance_array(table, i, j, n) <= 0.25
        base = golden.dist_array(words.points[i], words.points[j])
        assert prof.pairs_checked[n - 1] == int(close.sum())
        assert prof.delta(n) == float(base[close].max())


def test_doubling_profile_example():
    d = Doubling()
    prof = expansivity_profile(d, 0.1, 3, candidates(d, 4000, 3, 0))
    assert prof.delta(3) == pytest.approx(0.025, abs=1 / 4000)
    assert prof.delta(1) == pytest.approx(0.1, abs=1e-12)


def test_rotation_profile_does_not_decay():
    rot = Rotation(0.6180339887498949)
    cands = candidates(rot, 2000, 10, 0)
    for eps in (0.05, 0.3):
        prof = expansivity_profile(rot, eps, 10, cands)
        assert max(prof.delta_hat) - min(prof.delta_hat) < 1e-12
        assert prof.delta_hat[0] == pytest.approx(eps, abs=1 / 2000)
    # eps above the diameter: every pair stays close, delta_hat is the diameter
    prof = expansivity_profile(rot, 0.9, 3, cands)
    assert prof.delta_hat == pytest.approx([0.5] * 3, abs=1e-3)


def test_profile_counts_match_brute_force():
    d = Doubling()
    cands = candidates(d, 311, 4, 0)  # spacing does not divide eps: no float ties
    prof = expansivity_profile(d, 0.1, 4, cands)
    table = orbit_table(d, cands, 4)
    i, j = np.triu_indices(len(cands), 1)
    for n in prof.n:
        dn = bowen_distance_array(table, i, j, n)
        close = dn <= 0.1
        assert prof.pairs_checked[n - 1] == int(close.sum())
        base = d.dist_array(cands.points[i], cands.points[j])
        assert prof.delta(n) == pytest.approx(float(base[close].max()))


def test_continuity_modulus_examples(iet):
    d = Doubling()
    assert continuity_modulus(d, [0.01], 0.05, candidates(d, 4000, 1, 0)) == \
        [(0.01, pytest.approx(0.02, abs=1e-12))]
    rot = Rotation(0.3)
    assert continuity_modulus(rot, [0.01], 0.05, candidates(rot, 4000, 1, 0)) == \
        [(0.01, pytest.approx(0.01, abs=1e-12))]
    # away from S the exchange is a piecewise isometry
    out = continuity_modulus(iet, [0.001, 0.01], 0.05, candidates(iet, 4000, 1, 0))
    assert [e for _, e in out] == pytest.approx([0.001, 0.01], abs=1e-12)
    with pytest.raises(ValueError):
        continuity_modulus(d, [0.1], 0.05, candidates(d, 100, 1, 0))
