"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in
the terminal summary) or ``python tests/test_acceptance.py``.  Seeds and
statistical thresholds are fixed here, before any run.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from walkcap.capacity import capacity, equilibrium, extend
from walkcap.corrector import xi_n, xi_star_mc
from walkcap.crossterms import chi_C, chi_variants, dyadic_decompose, random_pair
from walkcap.deviation import (
    cn_beam,
    cn_bruteforce,
    cn_exact,
    confine_sample,
    confined_walk,
    plan_strategy,
    polymer_Z,
    rejection_stats,
    survival_dp,
)
from walkcap.folding import detector_fires, fold_profile, ladder
from walkcap.green import (
    PHI_C2,
    PhiTable,
    WalkProbabilities,
    canonical_ball,
    default_cache,
    green_dp,
    green_quadrature,
    green_truncated,
    harmonicity_residual,
    phi_bound,
)
from walkcap.lattice import PointSet, make_rng, range_of, simulate_walk

REPORT: list[str] = []

# frozen detector parameters (criterion 9)
DETECTOR_DELTA = 0.05
DETECTOR_I = 2


def report(k: int, ok: bool, detail: str):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line)
    return ok


def _pairs_check():
    cache = default_cache(5)
    worst = {"identity": 0.0, "eps_low": 0.0, "eps_high": 0.0, "chiC_min": 0.0, "chiC_gamma": 0.0}
    for t in range(200):
        A, B = random_pair(5, 64, 2024, t)
        rep = chi_variants(A, B, cache)
        # capacities recomputed from scratch in reversed insertion order
        rA = capacity(PointSet(A.array()[::-1]), cache)
        rB = capacity(PointSet(B.array()[::-1]), cache)
        rU = capacity(PointSet(B.union(A).array()[::-1]), cache)
        worst["identity"] = max(worst["identity"], abs(rA + rB - rU - rep.chiC))
        worst["eps_low"] = max(worst["eps_low"], -rep.epsilon)
        worst["eps_high"] = max(worst["eps_high"], rep.epsilon - rep.capIntersection)
        worst["chiC_min"] = max(worst["chiC_min"], rep.chiC - min(rep.capA, rep.capB))
        worst["chiC_gamma"] = max(worst["chiC_gamma"], rep.chiC - 2 * rep.gammaAB)
    return worst


def test_criterion_01_exact_decomposition():
    t0 = time.time()
    worst = _pairs_check()
    elapsed = time.time() - t0
    ok = worst["identity"] < 1e-8 and all(v <= 1e-8 for k, v in worst.items() if k != "identity") and elapsed < 120
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    assert report(1, ok, f"200 pairs: {detail}; {elapsed:.1f}s (< 120s)")


def test_criterion_02_dyadic_identity():
    cache = default_cache(5)
    t0 = time.time()
    res = [dyadic_decompose(simulate_walk(256, 31, 5, task=s), 3, cache).residual for s in range(20)]
    elapsed = time.time() - t0
    ok = max(res) < 1e-6 and elapsed < 300
    assert report(2, ok, f"L=3, n=256, 20 seeds: max residual {max(res):.2e} (< 1e-6); {elapsed:.1f}s (< 300s)")


def test_criterion_03_equilibrium():
    cache = default_cache(5)
    wp = WalkProbabilities(5, 16000)
    g0 = green_dp(np.zeros(5, dtype=np.int64), wp=wp)[0]
    g1 = green_dp(np.array([1, 0, 0, 0, 0]), wp=wp)[0]
    e1 = abs(capacity(PointSet([(0,) * 5]), cache) - 1 / g0)
    e2 = abs(capacity(PointSet([(0,) * 5, (1, 0, 0, 0, 0)]), cache) - 2 / (g0 + g1))
    pts = range_of(simulate_walk(600, 5, 5)).array()[:200]
    sol = equilibrium(PointSet(pts[:1]), cache)
    for p in pts[1:]:
        sol = extend(sol, p)
    rel = abs(sol.cap / capacity(PointSet(pts), cache) - 1)
    ok = e1 < 1e-9 and e2 < 1e-9 and rel < 1e-6 and len(pts) == 200
    assert report(3, ok, f"singleton err {e1:.1e}, pair err {e2:.1e} (< 1e-9 vs DP Green); 200-chain rel {rel:.1e} (< 1e-6)")


def test_criterion_04_green_consistency():
    cache = default_cache(5)
    pts = make_rng(404, 0).integers(-15, 16, size=(1000, 5))
    harm = float(np.abs(harmonicity_residual(pts, cache)).max())
    ball = canonical_ball(5, 10.0)
    quad = green_quadrature(ball, 5)
    wp = WalkProbabilities(5, 16000)
    dp = np.array([green_dp(x, wp=wp)[0] for x in ball])
    absdiff = float(np.abs(dp - quad).max())
    reldiff = float((np.abs(dp - quad) / quad).max())
    g2 = green_truncated([1, 0, 0, 0, 0], 2)
    ok = harm < 1e-9 and absdiff < 1e-8 and reldiff < 1e-8 and g2 == 0.1
    assert report(
        4,
        ok,
        f"harmonicity {harm:.1e} on 1000 pts; quadrature vs DP+tail on {len(ball)} canonical pts |x|<=10: "
        f"abs {absdiff:.1e}, rel {reldiff:.1e} (< 1e-8); G_2(e_1)={g2!r}",
    )


def test_criterion_05_phi_bounds():
    cache = default_cache(5)
    ball = canonical_ball(5, 20.0)
    worst = {}
    for T in (1, 5, 10):
        phi = PhiTable(5, T, cache)(ball)
        worst[T] = float((phi / phi_bound(ball, T)).max())
    g = cache.values(ball)
    phi1 = PhiTable(5, 1, cache)(ball)
    origin = np.all(ball == 0, axis=1)
    closed = np.where(origin, 2 * g - 1, 2 * g)
    err1 = float(np.abs(phi1 - closed).max())
    ok = all(v <= PHI_C2[5] for v in worst.values()) and err1 < 1e-9
    ratios = ", ".join(f"T={T}: {v:.3f}" for T, v in worst.items())
    assert report(5, ok, f"max phi/min-bound on {len(ball)} pts |x|<=20: {ratios} (<= C_2={PHI_C2[5]}); T=1 closed forms err {err1:.1e}")


def test_criterion_06_lemma_statistical():
    cache = default_cache(5)
    t0 = time.time()
    worst_margin = math.inf
    bad = 0
    for s in range(20):
        w = simulate_walk(200, 606, 5, task=s)
        for T in (10, 25):
            est, se = xi_star_mc(w, T, 100, seed=607, task=1000 * T + s, cache=cache)
            margin = 2 * xi_n(w, T, cache).total + 3 * se - est
            worst_margin = min(worst_margin, margin)
            bad += margin < 0
    elapsed = time.time() - t0
    ok = bad == 0 and elapsed < 1800
    assert report(6, ok, f"40 (walk, T) cases: violations {bad}, min margin 2xi+3sd-xi* = {worst_margin:.3f}; {elapsed:.0f}s (< 1800s)")


def _caps(n, d, seeds, base, cache):
    return np.array([capacity(range_of(simulate_walk(n, base, d, task=s)), cache) for s in range(seeds)])


def test_criterion_07_lln_and_variance():
    c5, c7 = default_cache(5), default_cache(7)
    ns = np.array([2000, 4000, 8000])
    per = [_caps(n, 5, 200, 7000 + n, c5) / n for n in ns]
    m = np.array([p.mean() for p in per])
    se = np.array([p.std(ddof=1) / math.sqrt(len(p)) for p in per])
    # weighted fit m(n) = gamma + a / sqrt(n); one degree of freedom left
    X = np.stack([np.ones(3), 1 / np.sqrt(ns)], axis=1)
    W = 1 / se**2
    coef = np.linalg.solve(X.T @ (W[:, None] * X), X.T @ (W * m))
    chi2 = float((W * (m - X @ coef) ** 2).sum())
    decreasing = bool(np.all(np.diff(m) < 0))
    ok5 = bool(np.all(m > 0)) and decreasing and coef[0] > 0 and coef[1] > 0 and chi2 <= 9.0
    v = np.array([_caps(n, 7, 200, 7700 + n, c7).var(ddof=1) / n for n in (1000, 2000, 4000)])
    dev = float(np.abs(v / v.mean() - 1).max())
    ok7 = dev <= 0.25
    assert report(
        7,
        ok5 and ok7,
        f"d=5 Cap/n means {np.round(m, 5).tolist()} (se {np.round(se, 5).tolist()}), decreasing={decreasing}, "
        f"fit gamma={coef[0]:.4f} + {coef[1]:.3f}/sqrt(n), chi2={chi2:.2f} (<= 9); "
        f"d=7 var/n {np.round(v, 4).tolist()}, max dev {dev:.1%} (<= 25%)",
    )


def test_criterion_08_confinement():
    cache = default_cache(5)
    n = 400
    plan = plan_strategy(5, n, n**0.8)
    L = plan.R
    conf = []
    for s in range(40):
        res = confine_sample(n, L, 808, 5, task=s, method="rejection", max_trials=10**8)
        assert res.accepted
        conf.append(capacity(range_of(res.walk), cache))
    free = _caps(n, 5, 200, 809, cache)
    conf = np.array(conf)
    gap = free.mean() - conf.mean()
    pooled = math.sqrt(conf.var(ddof=1) / len(conf) + free.var(ddof=1) / len(free))
    S = survival_dp(n, L, 5)
    rs = rejection_stats(n, L, 5, 10**7, seed=810)
    sigma = math.sqrt(S[-1] * (1 - S[-1]) / rs.trials)
    z = (rs.rate - S[-1]) / sigma
    lam = math.cos(math.pi / (L + 1))
    per_step = rs.per_step()
    rel = abs(per_step / lam - 1)
    ok = gap >= 5 * pooled and abs(z) <= 3 and rel <= 0.02
    assert report(
        8,
        ok,
        f"L={L}: confined mean {conf.mean():.2f} vs free {free.mean():.2f}, gap {gap / pooled:.1f} pooled se (>= 5); "
        f"acceptance {rs.rate:.3e} vs DP {S[-1]:.3e} (z={z:+.2f}); per-step {per_step:.5f} vs cos {lam:.5f} ({rel:.2%} <= 2%)",
    )


def test_criterion_09_folding_detector():
    n, d = 4000, 7
    zeta = n**0.8
    plan = plan_strategy(d, n, zeta)
    lad = ladder(d, n, zeta)
    fires_conf = fires_free = 0
    for s in range(200):
        w = confined_walk(n, plan.tau, plan.R, 909, d, task=s, method="tilt").walk
        fires_conf += detector_fires(fold_profile(w, lad), lad, DETECTOR_DELTA, DETECTOR_I)
        fires_free += detector_fires(fold_profile(simulate_walk(n, 910, d, task=s), lad), lad, DETECTOR_DELTA, DETECTOR_I)
    ok = fires_conf >= 190 and fires_free <= 10
    assert report(
        9,
        ok,
        f"d=7, n=4000, tau={plan.tau}, box side {plan.R}, delta={DETECTOR_DELTA}, I={DETECTOR_I}: "
        f"confined {fires_conf}/200 (>= 95%), free {fires_free}/200 (<= 5%)",
    )


def test_criterion_10_upward_constants():
    cache = default_cache(5)
    brute = max(abs(cn_exact(n, 5, cache).cn - cn_bruteforce(n, 5, cache).cn) for n in range(6))
    c = [cn_exact(n, 5, cache).cn for n in range(9)]
    sub_bad = [(m, k) for m in range(9) for k in range(9 - m) if not c[m + k] <= c[m] + c[k]]
    beam = [cn_beam(n, 5, 50, cache=cache).cn for n in range(9)]
    beam_err = max(abs(b / e - 1) for b, e in zip(beam, c))
    ok = brute <= 1e-12 and not sub_bad and beam_err <= 1e-12
    assert report(10, ok, f"exhaustive vs brute force n<=5: {brute:.1e}; subadditivity failures {len(sub_bad)}; beam(50) vs exhaustive n<=8 rel {beam_err:.1e}")


def test_criterion_11_polymer():
    out = polymer_Z(500, [0.0, 0.5, 1.0, 2.0], 200, d=7, seed=1111, cache=default_cache(7))
    ok = out[0].estimate == 1.0 and all(e.estimate >= 1 - 3 * e.stderr for e in out[1:])
    vals = ", ".join(f"Z({e.u:g})={e.estimate:.4f}+-{e.stderr:.4f}" for e in out)
    assert report(11, ok, f"n=500, d=7, 200 samples: {vals}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted((k, v) for k, v in list(globals().items()) if k.startswith("test_criterion")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
