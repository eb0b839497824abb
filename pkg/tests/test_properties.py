import numpy as np
import pytest

from epsn.errors import NotOptimal
from epsn.properties import PROPERTIES, random_candidates, random_words, run_suite
from epsn.separated import verify_separated
from epsn.systems import Doubling, Iet, Rotation, Sft, TwoCircle


@pytest.mark.parametrize("sys", [Doubling(), TwoCircle(), Iet((0.0, 0.4, 1.0), (0.6, -0.4)),
                                 Rotation(0.3819660112501051), Sft.golden_mean()],
                         ids=["doubling", "two_circle", "iet", "rotation", "golden"])
def test_suite_has_no_failures(sys):
    eps = [0.5, 0.25] if isinstance(sys, Sft) else [0.1, 0.2, 0.3]
    counts = run_suite(sys, eps, [1, 2, 3], 15, seed=4)
    assert [c.name for c in counts] == list(PROPERTIES)
    for c in counts:
        assert c.failed == 0, c.failures
        assert c.instances == 15 and c.passed + c.skipped == 15
        assert c.passed > 0


def test_suite_is_seeded():
    a = run_suite(Doubling(), [0.1, 0.2], [2, 3], 6, seed=9)
    b = run_suite(Doubling(), [0.1, 0.2], [2, 3], 6, seed=9)
    assert [c.row() for c in a] == [c.row() for c in b]


def test_budget_without_approximation_raises():
    with pytest.raises(NotOptimal):
        run_suite(Doubling(), [0.05], [3], 3, seed=0, budget=1, size=(150, 200),
                  properties=("subadditivity",))


def test_budget_with_approximation_counts():
    (c,) = run_suite(Doubling(), [0.05], [3], 3, seed=0, budget=1, size=(150, 200),
                     approximate=True, properties=("subadditivity",))
    assert c.approximate + c.passed + c.skipped == 3 and c.approximate > 0
    assert c.failed == 0


def test_random_words_are_admissible():
    sft = Sft.golden_mean()
    words = random_words(sft, 12, 50, np.random.default_rng(0))
    assert words.shape[1] == 12 and 0 < len(words) <= 50
    assert len(np.unique(words, axis=0)) == len(words)
    assert not np.any((words[:, :-1] == 1) & (words[:, 1:] == 1))


def test_random_candidates_stay_in_domain():
    iet = Iet((0.0, 0.4, 1.0), (0.6, -0.4))
    cands = random_candidates(iet, 40, 5, 0.1, np.random.default_rng(2))
    assert len(cands) > 0
    assert np.all((cands.points >= 0) & (cands.points < 1))
