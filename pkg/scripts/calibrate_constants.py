"""Fit the Green-bound constants c, C and the phi_T constant C_2.

The calibration set is disjoint from the points and horizons used by the
acceptance checks: random points with |x| <= 50 plus all canonical points
with |x| <= 6, and horizons T in {2, 3, 4, 6, 8, 12, 16}.  Fitted extremes
are widened by a 5% margin and printed as Python literals to paste into
``walkcap.green``.
"""

from __future__ import annotations

import argparse

import numpy as np

from walkcap.green import PhiTable, canonical_ball, default_cache, green_bound_ratio, phi_bound
from walkcap.lattice import make_rng

CAL_T = (2, 3, 4, 6, 8, 12, 16)


def calibration_points(d: int, n_random: int, seed: int) -> np.ndarray:
    rng = make_rng(seed, d)
    # uniform radius in [0, 50] with a random direction, rounded to the lattice
    v = rng.normal(size=(n_random, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = np.rint(v * rng.uniform(0, 50, size=(n_random, 1))).astype(np.int64)
    pts = pts[np.linalg.norm(pts, axis=1) <= 50]
    return np.unique(np.vstack([pts, canonical_ball(d, 6.0)]), axis=0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dims", type=int, nargs="*", default=[5, 7])
    ap.add_argument("--points", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--margin", type=float, default=0.05)
    args = ap.parse_args(argv)
    bounds, c2 = {}, {}
    for d in args.dims:
        cache = default_cache(d)
        pts = calibration_points(d, args.points, args.seed)
        ratio = green_bound_ratio(pts, cache.values(pts))
        bounds[d] = (float(ratio.min()) * (1 - args.margin), float(ratio.max()) * (1 + args.margin))
        if d < 5:
            # the phi_T bound needs d >= 5
            print(f"d={d}: {len(pts)} points, G ratio in [{ratio.min():.6g}, {ratio.max():.6g}]")
            continue
        worst = 0.0
        for T in CAL_T:
            phi = PhiTable(d, T, cache)(pts)
            worst = max(worst, float((phi / phi_bound(pts, T)).max()))
        c2[d] = worst * (1 + args.margin)
        print(f"d={d}: {len(pts)} points, G ratio in [{ratio.min():.6g}, {ratio.max():.6g}], phi ratio max {worst:.6g}")
    print("GREEN_BOUNDS = {" + ", ".join(f"{d}: ({lo:.4g}, {hi:.4g})" for d, (lo, hi) in bounds.items()) + "}")
    print("PHI_C2 = {" + ", ".join(f"{d}: {v:.4g}" for d, v in c2.items()) + "}")


if __name__ == "__main__":
    main()
