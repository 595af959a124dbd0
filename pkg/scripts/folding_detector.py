"""Folding detector at d=7: per-level |K^_i| for confined and free walks.

Prints the ladder, the median per-level counts and the firing frequencies
for the chosen (delta, I).
"""

from __future__ import annotations

import argparse

import numpy as np

from walkcap.deviation import confined_walk, plan_strategy
from walkcap.folding import detector_fires, fold_profile, ladder
from walkcap.lattice import simulate_walk


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--zeta-exp", type=float, default=0.8)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--I", type=int, default=2)
    ap.add_argument("--C0", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=909)
    args = ap.parse_args(argv)
    d, n = 7, args.n
    zeta = n**args.zeta_exp
    plan = plan_strategy(d, n, zeta)
    lad = ladder(d, n, zeta, args.C0)
    for lv in lad.levels:
        print(f"level {lv.i:3d}: rho={lv.rho:.4g} r={lv.r:.3f} side={lv.side} threshold={lv.threshold:.1f} L={lv.L:.1f}")
    conf, free = [], []
    for s in range(args.seeds):
        conf.append(fold_profile(confined_walk(n, plan.tau, plan.R, args.seed, d, task=s, method="tilt").walk, lad))
        free.append(fold_profile(simulate_walk(n, args.seed + 1, d, task=s), lad))
    for i in lad.indices:
        c = np.median([p.perLevel[i] for p in conf])
        f = np.median([p.perLevel[i] for p in free])
        print(f"|K^_{i}| median: confined {c:.0f}, free {f:.0f}")
    fc = np.mean([detector_fires(p, lad, args.delta, args.I) for p in conf])
    ff = np.mean([detector_fires(p, lad, args.delta, args.I) for p in free])
    print(f"detector fires: confined {fc:.1%}, free {ff:.1%}")


if __name__ == "__main__":
    main()
