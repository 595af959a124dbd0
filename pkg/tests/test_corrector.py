import numpy as np
import pytest

from walkcap.capacity import capacity
from walkcap.corrector import blocks, chi_n, decomposition_gap, xi_n, xi_n_bruteforce, xi_star_mc
from walkcap.green import PhiTable
from walkcap.lattice import range_of, simulate_walk, straight_walk


def test_n_zero_total(cache5):
    w = simulate_walk(0, 0, 5)
    tr = xi_n(w, 4, cache5)
    phi0 = PhiTable(5, 4, cache5)(np.zeros((1, 5), dtype=np.int64))[0]
    assert tr.total == pytest.approx(phi0 / cache5.G0(), rel=1e-14)


def test_straight_walk_matches_bruteforce(cache5):
    w = straight_walk(50)
    a, b = xi_n(w, 10, cache5), xi_n_bruteforce(w, 10, cache5)
    assert np.allclose(a.perStep, b.perStep, rtol=1e-10, atol=0)
    assert a.total == pytest.approx(b.total, rel=1e-12)


def test_trace_nonnegative_and_deterministic(cache5):
    w = simulate_walk(120, 3, 5)
    a, b = xi_n(w, 8, cache5), xi_n(w, 8, cache5)
    assert np.all(a.perStep >= 0)
    assert np.array_equal(a.perStep, b.perStep)
    assert a.total == pytest.approx(a.perStep.sum())
    # nondecreasing in n: prefixes of the same walk
    short = xi_n(simulate_walk(120, 3, 5).__class__(w.positions[:61]), 8, cache5)
    assert short.total <= a.total
    assert np.allclose(short.perStep, a.perStep[:61], rtol=1e-12, atol=0)


def test_blocks_layout():
    assert blocks(20, 5, 0) == [(0, 5), (5, 10), (10, 15), (15, 20)]
    assert blocks(20, 5, 3) == [(3, 8), (8, 13), (13, 18), (18, 20)]


def test_chi_n_edge_and_replay(cache5):
    w = simulate_walk(64, 1, 5)
    assert chi_n(w, 64, cache5) == 0.0
    assert chi_n(w, 8, cache5) == chi_n(w, 8, cache5)


def test_chi_n_matches_direct_sum(cache5):
    w = simulate_walk(60, 2, 5)
    T = 6
    tot = 0.0
    for j in range(T):
        bl = blocks(60, T, j)
        for l in range(1, len(bl)):
            A, B = range_of(w, j, bl[l - 1][1]), range_of(w, *bl[l])
            tot += capacity(A, cache5) + capacity(B, cache5) - capacity(A.union(B), cache5)
    assert chi_n(w, T, cache5) == pytest.approx(tot / T, rel=1e-10)


def test_chi_n_summands_bounded(cache5):
    w = simulate_walk(80, 5, 5)
    T = 8
    assert 0 <= chi_n(w, T, cache5) <= (80 // T - 1) * (T + 1)


def test_decomposition_gap(cache5):
    for seed in range(3):
        w = simulate_walk(100, seed, 5)
        for T in (5, 10):
            assert decomposition_gap(w, T, cache5) <= T


def test_xi_star_edge_and_guards(cache5):
    w = simulate_walk(30, 0, 5)
    assert xi_star_mc(w, 30, 100, cache=cache5) == (0.0, 0.0)
    with pytest.raises(ValueError):
        xi_star_mc(w, 5, 50, cache=cache5)
    with pytest.raises(ValueError):
        xi_n(w, 31, cache5)


def test_xi_star_stderr_scaling(cache5):
    w = simulate_walk(40, 4, 5)
    _, s1 = xi_star_mc(w, 10, 100, seed=1, cache=cache5)
    _, s4 = xi_star_mc(w, 10, 400, seed=2, cache=cache5)
    assert abs(s4 / s1 - 0.5) < 0.5 * 0.3


def test_lemma_on_one_walk(cache5):
    w = simulate_walk(80, 6, 5)
    est, se = xi_star_mc(w, 10, 100, seed=3, cache=cache5)
    assert est <= 2 * xi_n(w, 10, cache5).total + 3 * se
