import math

import numpy as np
import pytest

from epsn.complexity import (
    ComplexityCurve,
    box_dimension_estimate,
    complexity_curve,
    count_words,
    dyadic_exponent,
    entropy_estimate,
    growth_diagnostic,
    iet_closed_form_curve,
    iet_complexity_closed_form,
    iet_n0,
    sft_complexity_exact,
    synthetic_curve,
)
from epsn.errors import InsufficientData, MonotonicityViolation
from epsn.separated import verify_separated
from epsn.systems import Doubling, Rotation, Sft, TwoCircle, candidates

FULL2 = [[1, 1], [1, 1]]
GOLDEN_M = [[1, 1], [1, 0]]


def test_word_count_examples():
    assert sft_complexity_exact(FULL2, 1, 3) == 16
    assert sft_complexity_exact(GOLDEN_M, 1, 3) == 8
    for M in (FULL2, GOLDEN_M, [[1, 1, 1]] * 3):
        assert sft_complexity_exact(M, 0, 1) == len(M)


def test_word_count_against_enumeration():
    for M in (GOLDEN_M, [[1, 1, 0], [0, 1, 1], [1, 0, 1]]):
        sft = Sft(tuple(map(tuple, M)))
        for L in range(1, 9):
            assert count_words(M, L) == len(sft.enumerate_words(L))


def test_word_counts_do_not_overflow():
    assert count_words(FULL2, 200) == 2 ** 200


def test_closed_form_examples():
    assert iet_complexity_closed_form(3, 5) == 9
    assert iet_complexity_closed_form(2, 7) == 7
    assert all(iet_complexity_closed_form(m, 1) == 1 for m in (2, 3, 7))


def test_dyadic_exponent():
    assert dyadic_exponent(0.25) == 2
    assert dyadic_exponent(1.0) == 0
    assert dyadic_exponent(0.3) is None


def test_full_shift_curve():
    curve = complexity_curve(Sft.full(2), 0.5, range(1, 5))
    assert curve.C == [4, 8, 16, 32]
    assert curve.all_exact


@pytest.mark.parametrize("M", [FULL2, GOLDEN_M, [[1, 1, 1]] * 3])
def test_word_count_equals_mis_on_all_words(M):
    sft = Sft(tuple(map(tuple, M)))
    for k in range(4):
        cands = candidates(sft, 1, 6, 0, k_max=k)
        mis = complexity_curve(sft, 2.0 ** -k, range(1, 7), cands, formula=False)
        assert mis.all_exact
        assert mis.C == [sft_complexity_exact(M, k, n) for n in range(1, 7)]


def test_rotation_complexity_is_constant():
    rot = Rotation(0.6180339887498949)
    curve = complexity_curve(rot, 0.3, range(1, 8), candidates(rot, 1000, 7, 0))
    assert curve.C == [3] * 7


def test_iet_closed_form_on_a_fine_grid(iet):
    eps = 0.1
    n0 = iet_n0(iet, eps)
    ns = range(n0, n0 + 8)
    curve = complexity_curve(iet, eps, ns, candidates(iet, 4000, n0 + 7, 0), keep_sets=True)
    assert curve.C == [iet_complexity_closed_form(3, n) for n in ns]
    closed = iet_closed_form_curve(iet, eps, ns)
    assert closed.C == curve.C
    # the closed-form sets are separated themselves
    for n in ns:
        assert verify_separated(iet, closed.sets[n])


def test_iet_n0_is_first_fine_partition(iet):
    n0 = iet_n0(iet, 0.1)
    assert np.diff(iet.partition(n0)).max() < 0.1 <= np.diff(iet.partition(n0 - 1)).max()


def test_monotonicity_violation():
    curve = ComplexityCurve(0.1)
    curve.add(1, 5, "mis-exact")
    curve.add(2, 4, "mis-exact")
    with pytest.raises(MonotonicityViolation):
        curve.check_monotone()
    # greedy entries are only bounds and are not checked
    ok = ComplexityCurve(0.1)
    ok.add(1, 5, "mis-exact")
    ok.add(2, 4, "mis-greedy")
    ok.check_monotone()


def test_budget_fallback_marks_entries_greedy():
    d = Doubling()
    curve = complexity_curve(d, 0.05, [3], candidates(d, 2000, 3, 0), budget=1)
    assert curve.method in (["mis-greedy"], ["mis-exact"])


# --- growth ---------------------------------------------------------------------------

def test_growth_on_sqrt_exponent_curve():
    curve = synthetic_curve(1.0, range(1, 101), lambda n: 2 ** math.isqrt(n))
    g = growth_diagnostic(curve)
    for n, q in zip(g.n, g.q):
        assert q == (0.5 if math.isqrt(n) ** 2 == n else 0.0)
    assert g.liminf == 0.0 and g.limsup == 0.5
    assert g.subexponential_consistent


def test_growth_on_full_shift():
    g = growth_diagnostic(complexity_curve(Sft.full(2), 0.5, range(1, 40)))
    assert g.q == [0.5] * len(g.q)
    assert not g.subexponential_consistent
    assert g.subsequence == [n for n in g.n if n >= 20]


def test_growth_on_iet_closed_form(iet):
    g = growth_diagnostic(synthetic_curve(0.1, range(1, 31), lambda n: 2 * (n - 1) + 1))
    assert g.q == pytest.approx([2 / (2 * (n - 1) + 1) for n in g.n])
    assert g.q_at(30) < 0.04


def test_growth_needs_consecutive_entries():
    with pytest.raises(InsufficientData):
        growth_diagnostic(synthetic_curve(0.1, [1, 3, 5], lambda n: n))


# --- entropy and dimension -------------------------------------------------------

def test_full_shift_entropy():
    curves = [complexity_curve(Sft.full(2), 2.0 ** -k, range(1, 41)) for k in (1, 2, 3)]
    est = entropy_estimate(curves)
    for _, slope, _, _ in est.table:
        assert abs(slope - math.log(2)) < 1e-9


def test_golden_mean_entropy_against_characteristic_root():
    lam = max(np.roots([1, -1, -1]).real)
    curves = [complexity_curve(Sft.golden_mean(), 2.0 ** -k, range(1, 61)) for k in (1, 2)]
    est = entropy_estimate(curves)
    assert abs(est.value - math.log(lam)) < 1e-6


def test_iet_closed_form_entropy_vanishes():
    # the log-derivative of 2n - 1 is about 1/n, so the tail window must sit past n = 100
    curve = synthetic_curve(0.01, range(1, 201), lambda n: 2 * (n - 1) + 1)
    est = entropy_estimate([curve])
    assert est.table[0][2] >= 100 and est.value < 0.01


def test_entropy_needs_enough_points():
    with pytest.raises(InsufficientData):
        entropy_estimate([synthetic_curve(0.1, range(1, 5), lambda n: n)])


def test_box_dimension_examples():
    eps = [0.1, 0.05, 0.025, 0.0125, 0.01]  # a full decade
    d = Doubling()
    est = box_dimension_estimate(d, 1, eps, candidates(d, 8000, 1, 0))
    # packing counts are floor(1/eps) up to a grid tie at the boundary
    assert all(abs(c - round(1 / e)) <= 1 for c, e in zip(est.C, est.eps))
    assert abs(est.value - 1.0) < 0.05
    tc = TwoCircle()
    est = box_dimension_estimate(tc, 1, eps, candidates(tc, 8000, 1, 0))
    assert abs(est.value - 1.0) < 0.05
    full = box_dimension_estimate(Sft.full(2), 1, [2.0 ** -k for k in range(1, 6)])
    assert full.value == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InsufficientData):
        box_dimension_estimate(d, 1, [0.1, 0.05])
