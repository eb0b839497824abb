import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from epsn.matching import hall_violator, hopcroft_karp


def _scipy_size(n_left, n_right, adj):
    rows = [u for u in range(n_left) for _ in adj[u]]
    cols = [v for u in range(n_left) for v in adj[u]]
    m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_left, n_right))
    return int((maximum_bipartite_matching(m, perm_type="column") >= 0).sum())


@given(st.integers(1, 25), st.integers(1, 25), st.floats(0.0, 0.6), st.integers(0, 10**6))
def test_matching_size_matches_scipy(n_left, n_right, p, seed):
    rng = np.random.default_rng(seed)
    adj = [sorted(np.flatnonzero(rng.random(n_right) < p).tolist()) for _ in range(n_left)]
    ml, mr = hopcroft_karp(n_left, n_right, adj)
    for u, v in enumerate(ml):
        if v >= 0:
            assert v in adj[u] and mr[v] == u
    size = int((ml >= 0).sum())
    assert size == int((mr >= 0).sum())
    assert size == _scipy_size(n_left, n_right, adj)

    witness = hall_violator(n_left, adj, ml, mr)
    if size == n_left:
        assert witness is None
    else:
        s, nbhd = witness
        assert set(nbhd) == {v for u in s for v in adj[u]}
        assert len(nbhd) == len(s) - (n_left - size)


def test_hall_violator_example():
    # left 0 and 1 both only see right 0
    adj = [[0], [0], [1]]
    ml, mr = hopcroft_karp(3, 2, adj)
    s, nbhd = hall_violator(3, adj, ml, mr)
    assert s == [0, 1] and nbhd == [0]


def test_perfect_matching_on_a_shifted_chain():
    n = 200
    adj = [[u, u + 1] if u + 1 < n else [u] for u in range(n)]
    ml, _ = hopcroft_karp(n, n, adj)
    assert (ml >= 0).all()


@pytest.mark.parametrize("n", [0, 1])
def test_trivial_sizes(n):
    ml, mr = hopcroft_karp(n, n, [[0]] * n)
    assert (ml >= 0).all()
