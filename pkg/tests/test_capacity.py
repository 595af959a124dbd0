import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkcap.capacity import (
    capacity,
    capacity_mc,
    cube_capacity,
    equilibrium,
    extend,
    extend_many,
    prefix_capacities,
    range_capacity_curve,
)
from walkcap.green import default_cache
from walkcap.lattice import PointSet, cube_points, make_rng, range_of, simulate_walk


def _random_set(seed, size, spread=4, d=5):
    return PointSet.from_array_unique(make_rng(seed, 11).integers(-spread, spread + 1, size=(size, d)))


def test_singleton_and_pair(cache5, g5):
    g0, g1 = g5
    assert capacity(np.zeros((1, 5), dtype=np.int64), cache5) == pytest.approx(1 / g0, abs=1e-12)
    sol = equilibrium(PointSet([(0,) * 5, (1, 0, 0, 0, 0)]), cache5)
    assert sol.cap == pytest.approx(2 / (g0 + g1), abs=1e-12)
    assert np.allclose(sol.eq, 1 / (g0 + g1))


def test_empty_set_capacity_zero():
    assert capacity(PointSet(d=5)) == 0.0


def test_equilibrium_invariants(cache5):
    A = _random_set(1, 60)
    sol = equilibrium(A, cache5)
    assert np.all(sol.eq >= 0) and np.all(sol.eq <= 1)
    assert sol.cap == pytest.approx(sol.eq.sum())
    assert np.abs(cache5.matrix(A.array()) @ sol.eq - 1).max() < 1e-9
    assert 0 < sol.cap <= len(A)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**30), st.integers(2, 64), st.integers(1, 64))
def test_monotone_subadditive_translation(seed, na, nb):
    cache = default_cache(5)
    A, B = _random_set(seed, na), _random_set(seed + 1, nb)
    U, I = A.union(B), A.intersection(B)
    cA, cB, cU = capacity(A, cache), capacity(B, cache), capacity(U, cache)
    assert cA <= cU + 1e-8 and cB <= cU + 1e-8
    assert cU <= cA + cB - capacity(I, cache) + 1e-8
    assert cA <= len(A) + 1e-8
    assert capacity(A.translate((7, -3, 2, 0, 11)), cache) == pytest.approx(cA, abs=1e-8)


def test_extend_matches_full_solve(cache5):
    sol = extend(equilibrium(PointSet([(0,) * 5]), cache5), (1, 0, 0, 0, 0))
    assert sol.cap == pytest.approx(capacity(PointSet([(0,) * 5, (1, 0, 0, 0, 0)]), cache5), abs=1e-12)
    with pytest.raises(ValueError):
        extend(sol, (0,) * 5)


def test_extend_chain_along_walk(cache5):
    R = range_of(simulate_walk(400, 2, 5))
    pts = R.array()[:200]
    sol = equilibrium(PointSet(pts[:1]), cache5)
    for p in pts[1:]:
        sol = extend(sol, p)
    full = capacity(PointSet(pts), cache5)
    assert abs(sol.cap / full - 1) < 1e-6
    sol2 = extend_many(equilibrium(PointSet(pts[:1]), cache5), pts[1:])
    assert abs(sol2.cap / full - 1) < 1e-9


def test_prefix_capacities_and_curve(cache5):
    w = simulate_walk(150, 4, 5)
    R = range_of(w)
    pc = prefix_capacities(R.array(), cache5)
    assert np.all(np.diff(pc) >= -1e-10)
    assert pc[-1] == pytest.approx(capacity(R, cache5), rel=1e-10)
    times = [0, 50, 150]
    curve = range_capacity_curve(w, times, cache5)
    for t, v in zip(times, curve):
        assert v == pytest.approx(capacity(range_of(w, 0, t), cache5), rel=1e-10)


def test_cube_capacity_growth(cache5):
    rs = np.array([3, 5, 7, 9, 11])
    caps = [cube_capacity(r, 5, cache5) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(caps), 1)[0]
    assert 5 - 2.3 <= slope <= 5 - 1.7


def test_cube_capacity_local_slopes_approach_d_minus_2(cache5):
    rs = np.array([3, 5, 7, 9, 11, 15])
    caps = np.array([cube_capacity(r, 5, cache5) for r in rs])
    local = np.diff(np.log(caps)) / np.diff(np.log(rs))
    assert np.all(np.diff(local) < 0)
    assert 3.0 < local[-1] < 3.2


@pytest.mark.parametrize("r, d", [(2, 5), (3, 5), (4, 5), (3, 7)])
def test_cube_capacity_matches_dense_solve(r, d):
    cache = default_cache(d)
    assert cube_capacity(r, d, cache) == pytest.approx(capacity(cube_points((0,) * d, r), cache), rel=1e-12)


def test_mc_singleton_and_pair(cache5):
    one = PointSet([(0,) * 5])
    mc = capacity_mc(one, 20000, 8.0, seed=1)
    assert abs(mc.estimate - 1 / cache5.G0()) < 3 * mc.stderr + mc.biasBound
    two = PointSet([(0,) * 5, (1, 0, 0, 0, 0)])
    mc = capacity_mc(two, 20000, 8.0, seed=2)
    assert abs(mc.estimate - capacity(two, cache5)) < 3 * mc.stderr + mc.biasBound


def test_mc_radius_doubling_within_bias(cache5):
    A = PointSet([(0,) * 5, (1, 0, 0, 0, 0), (1, 1, 0, 0, 0)])
    a = capacity_mc(A, 40000, 10.0, seed=3)
    b = capacity_mc(A, 40000, 20.0, seed=3)
    assert abs(a.estimate - b.estimate) < a.biasBound + 3 * np.hypot(a.stderr, b.stderr)


def test_mc_rejects_bad_input():
    with pytest.raises(ValueError):
        capacity_mc(PointSet([(0,) * 5]), 0, 10.0)
    with pytest.raises(ValueError):
        capacity_mc(PointSet([(0,) * 5, (3, 0, 0, 0, 0)]), 10, 2.0)


def test_lemma_box_sum_growth(cache5):
    """sum_{x in Lambda} e(x)/(|x|^{d-4}+1) over random Lambda in Q(r) grows at most like r^2."""
    rs = [4, 8, 16, 32]
    vals = []
    for r in rs:
        pts = cube_points((0,) * 5, r)
        sub = pts[make_rng(r, 3).random(len(pts)) < min(1.0, 600 / len(pts))]
        sol = equilibrium(PointSet(sub), cache5)
        norm = np.sqrt((sub**2).sum(axis=1))
        vals.append(float(sol.eq @ (1 / (norm + 1))))
    slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
    assert slope <= 2.2
