import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkcap.capacity import capacity, equilibrium
from walkcap.crossterms import (
    chi,
    chi_C,
    chi_variants,
    dyadic_decompose,
    dyadic_times,
    gamma,
    gamma_tail_samples,
    random_pair,
)
from walkcap.green import default_cache
from walkcap.lattice import PointSet, cube_points, range_of, simulate_walk


def test_chi_C_self_is_cap(cache5):
    A, _ = random_pair(5, 30, 0)
    assert chi_C(A, A, cache5) == pytest.approx(capacity(A, cache5), abs=1e-10)


def test_chi_C_decreases_with_separation(cache5):
    A = PointSet(cube_points((0,) * 5, 3))
    vals = [chi_C(A, A.translate((D, 0, 0, 0, 0)), cache5) for D in (10, 20, 40)]
    assert vals[0] > vals[1] > vals[2] > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_report_invariants(seed):
    A, B = random_pair(5, 40, seed)
    rep = chi_variants(A, B, default_cache(5))
    assert rep.violations(1e-8) == []
    assert rep.chiAB <= rep.chiTilde + 1e-10
    assert rep.chiTilde <= rep.chiBar + 1e-10
    assert rep.chiZero <= rep.chiC + 1e-8
    assert rep.capUnion <= rep.capA + rep.capB - rep.chiZero + 1e-8


def test_disjoint_pair_identity(cache5):
    A = PointSet(cube_points((0,) * 5, 2))
    B = A.translate((3, 0, 0, 0, 0))
    rep = chi_variants(A, B, cache5)
    assert abs(rep.chiAB + rep.chiBA - rep.chiC) < 1e-10
    assert rep.capIntersection == 0


def test_chi_tilde_symmetric(cache5):
    A, B = random_pair(5, 30, 5)
    assert chi_variants(A, B, cache5).chiTilde == pytest.approx(chi_variants(B, A, cache5).chiTilde, abs=1e-12)


def test_two_point_closed_form(cache5, g5):
    g0, g1 = g5
    x = (1, 0, 0, 0, 0)
    val = chi(PointSet([(0,) * 5]), PointSet([x]), cache5)
    assert val == pytest.approx((1 / (g0 + g1)) * g1 / g0, abs=1e-14)


def test_report_on_equal_sets(cache5):
    A, _ = random_pair(5, 20, 9)
    rep = chi_variants(A, A, cache5)
    assert rep.epsilon == pytest.approx(rep.chiAB + rep.chiBA - rep.capA, abs=1e-10)


def test_gamma_monotone(cache5):
    A, B = random_pair(5, 30, 3)
    A2 = A.union(PointSet([(9, 9, 9, 9, 9)]))
    B2 = B.union(PointSet([(-9, 0, 0, 0, 0)]))
    assert gamma(A, B, cache5) <= gamma(A2, B, cache5) + 1e-12
    assert gamma(A, B, cache5) <= gamma(A, B2, cache5) + 1e-12


def test_cross_terms_need_nonempty(cache5):
    with pytest.raises(ValueError):
        chi_C(PointSet(d=5), PointSet([(0,) * 5]), cache5)


def test_dyadic_level_one(cache5):
    w = simulate_walk(64, 1, 5)
    rec = dyadic_decompose(w, 1, cache5)
    a, b = range_of(w, 0, 32), range_of(w, 32, 64)
    assert rec.capRange == pytest.approx(capacity(a, cache5) + capacity(b, cache5) - chi_C(a, b, cache5), abs=1e-10)


def test_dyadic_identity_and_lengths(cache5):
    rec = dyadic_decompose(simulate_walk(250, 2, 5), 3, cache5)
    assert rec.residual < 1e-8
    assert all(abs(l - 250 / 8) <= 1 for l in rec.pieceLengths)
    t2, t3 = dyadic_times(250, 2), dyadic_times(250, 3)
    assert set(t2) <= set(t3)
    with pytest.raises(ValueError):
        dyadic_decompose(simulate_walk(4, 0, 5), 3, cache5)


def test_gamma_tail_samples_positive(cache7):
    s = gamma_tail_samples(60, 7, 5, cache=cache7)
    assert s.shape == (5,) and np.all(s > 0)


def test_random_pair_sizes():
    for t in range(20):
        A, B = random_pair(5, 16, 1, t)
        assert 1 <= len(A) <= 16 and 1 <= len(B) <= 16
