import math

import numpy as np
import pytest

from walkcap.capacity import capacity, cube_capacity
from walkcap.deviation import (
    box_survival_power,
    box_survival_rate,
    canonical_sequences,
    canonical_steps,
    cn_beam,
    cn_bruteforce,
    cn_exact,
    confine_sample,
    confined_walk,
    deviation_prob_mc,
    jackknife_mean_stderr,
    plan_strategy,
    polymer_Z,
    rejection_stats,
    survival_dp,
    wilson_interval,
)
from walkcap.lattice import cube_bounds, range_of, simulate_walk


def test_plan_d5_and_d7():
    p5 = plan_strategy(5, 400, 400**0.8)
    assert p5.tau == 400 and p5.R == math.ceil((400**2 / 400**0.8) ** (1 / 3))
    p7 = plan_strategy(7, 4000, 4000**0.8)
    assert p7.tau == math.ceil(4000**0.8) and p7.R == math.ceil(4000 ** (0.8 / 5))
    for p in (p5, p7):
        assert p.zeta / 2 <= p.balance <= 2 * p.zeta or p.d == 7
        tau, R2, ratio = p.predictedExponent
        assert ratio == pytest.approx(tau / R2)
    # rounding R up makes tau^2/R^{d-2} smaller; d=7 keeps tau = zeta
    assert p7.tau >= p7.zeta


def test_plan_balance_within_factor_two():
    for d, n, z in [(5, 400, 121.0), (5, 2000, 800.0), (7, 4000, 761.5), (7, 10**5, 2000.0)]:
        p = plan_strategy(d, n, z)
        if d == 5:
            assert z / 2 <= p.balance <= 2 * z
        else:
            assert p.R ** (d - 2) / 2 <= p.tau <= 2 * p.R ** (d - 2) * 2 ** (d - 2)


def test_plan_d6_unknown():
    p = plan_strategy(6, 100, 10.0)
    assert p.status == "unknown strategy" and p.tau is None and p.predictedExponent is None


def test_box_survival_rates():
    assert box_survival_rate(1) == 0.0
    assert box_survival_rate(2) == pytest.approx(0.5, abs=1e-15)
    assert abs(box_survival_power(9, 5) - math.cos(math.pi / 10)) < 1e-10
    with pytest.raises(ValueError):
        box_survival_rate(0)


def test_survival_dp_decay():
    S = survival_dp(200, 5, 5)
    assert S[0] == 1.0 and np.all(np.diff(S) <= 0)
    assert (S[200] / S[100]) ** (1 / 100) == pytest.approx(math.cos(math.pi / 6), rel=1e-6)


def test_rejection_matches_dp():
    S = survival_dp(60, 5, 5)
    rs = rejection_stats(60, 5, 5, 400000, seed=3)
    sigma = np.sqrt(S * (1 - S) / rs.trials)
    assert np.all(np.abs(rs.survivors / rs.trials - S) <= 4 * sigma + 1e-12)


@pytest.mark.parametrize("method", ["rejection", "tilt"])
def test_confined_positions_and_cap(method, cache5):
    L = 5
    res = confine_sample(40, L, 1, 5, method=method)
    assert res.accepted and res.approximate == (method == "tilt")
    pos = res.walk.positions
    lo, hi = cube_bounds(np.zeros(5, dtype=np.int64), L)
    assert np.all(pos >= lo) and np.all(pos <= hi)
    assert res.walk.is_nearest_neighbor()
    assert capacity(range_of(res.walk), cache5) <= cube_capacity(L, 5, cache5) + 1e-9


def test_rejection_budget_exhausted():
    res = confine_sample(400, 3, 0, 5, method="rejection", max_trials=50)
    assert not res.accepted and res.trials == 50


def test_confined_walk_then_free():
    res = confined_walk(300, 100, 4, 2, 7, method="tilt")
    pos = res.walk.positions
    assert pos.shape == (301, 7) and res.walk.is_nearest_neighbor()
    lo, hi = cube_bounds(np.zeros(7, dtype=np.int64), 4)
    assert np.all(pos[:101] >= lo) and np.all(pos[:101] <= hi)


def test_wilson_interval_contains_p():
    lo, hi = wilson_interval(5, 100)
    assert lo < 0.05 < hi
    assert wilson_interval(0, 100)[0] == 0.0


def test_deviation_prob_edges(cache5):
    impossible = deviation_prob_mc(50, 60.0, 10, cache=cache5)
    assert impossible.estimate == 0.0 and impossible.samples == 0
    half = deviation_prob_mc(100, 1e-12, 200, seed=1, cache=cache5)
    assert half.lower <= 0.5 <= half.upper


def test_jackknife_is_standard_error_of_mean():
    x = np.random.default_rng(0).normal(size=500)
    assert jackknife_mean_stderr(x) == pytest.approx(x.std(ddof=1) / math.sqrt(len(x)), rel=1e-10)


def test_polymer_basics(cache7):
    out = polymer_Z(200, [0.0, 1.0, 2.0], 60, d=7, seed=4, cache=cache7)
    assert out[0].estimate == 1.0 and out[0].stderr == 0.0
    for e in out[1:]:
        assert e.estimate >= 1 - 3 * e.stderr
    with pytest.raises(ValueError):
        polymer_Z(10, [-1.0], 5, d=7)


def test_canonical_steps():
    assert canonical_steps([3, 3, 8, 2]) == (0, 0, 2, 1)
    seqs = list(canonical_sequences(3, 5))
    assert all(canonical_steps(s) == s for s in seqs)
    assert len(seqs) == 11


def test_cn_small_values(cache5, g5):
    g0, g1 = g5
    assert cn_exact(0, 5, cache5).cn == pytest.approx(1 / g0, abs=1e-14)
    assert cn_exact(1, 5, cache5).cn == pytest.approx(2 / (g0 + g1), abs=1e-14)
    with pytest.raises(ValueError):
        cn_exact(9, 5, cache5)


def test_cn_exhaustive_equals_bruteforce(cache5):
    for n in range(4):
        assert cn_exact(n, 5, cache5).cn == pytest.approx(cn_bruteforce(n, 5, cache5).cn, abs=1e-12)


def test_cn_witness_and_subadditivity(cache5):
    c = [cn_exact(n, 5, cache5) for n in range(7)]
    for rec in c:
        w = rec.witness_walk()
        assert w.n == rec.n and w.is_nearest_neighbor()
        assert capacity(range_of(w), cache5) == pytest.approx(rec.cn, abs=1e-12)
    for m in range(7):
        for k in range(7 - m):
            assert c[m + k].cn <= c[m].cn + c[k].cn + 1e-12


def test_beam_prior_and_bound(cache5):
    exact = [cn_exact(n, 5, cache5).cn for n in range(7)]
    for n in range(1, 7):
        rec = cn_beam(n, 5, 50, cache=cache5)
        pos = rec.witness_walk().positions
        for k in range(0, n - 1, 2):
            assert not np.array_equal(pos[k], pos[k + 2])
        assert rec.cn <= min(exact[a] + exact[n - a] for a in range(n + 1)) + 1e-12
    with pytest.raises(ValueError):
        cn_beam(3, 5, 0)


def test_beam_per_step_settles_above_range_rate(cache5):
    vals = np.array([cn_beam(n, 5, 50, cache=cache5).cn / n for n in (8, 16, 32, 64)])
    steps = -np.diff(vals)
    assert np.all(steps > 0) and np.all(np.diff(steps) < 0)
    # Cap(R_n)/n of typical ranges is far below the best paths
    typical = np.mean([capacity(range_of(simulate_walk(400, s, 5)), cache5) / 400 for s in range(5)])
    assert vals[-1] > typical
