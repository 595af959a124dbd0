"""Maximal path capacity c_n: exhaustive values and beam-search lower bounds.

Prints c_n for small n, checks subadditivity on all computed pairs, and
the beam estimate of c_n/n for longer paths.
"""

from __future__ import annotations

import argparse

from walkcap.deviation import cn_beam, cn_exact
from walkcap.green import default_cache


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--exact-max", type=int, default=8)
    ap.add_argument("--beam", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--width", type=int, default=50)
    args = ap.parse_args(argv)
    cache = default_cache(args.d)
    exact = []
    for n in range(args.exact_max + 1):
        rec = cn_exact(n, args.d, cache, cap=args.exact_max)
        exact.append(rec.cn)
        print(f"c_{n} = {rec.cn:.12f} ({rec.examined} canonical paths, witness {''.join(map(str, rec.witness))})", flush=True)
    bad = [(m, k) for m in range(len(exact)) for k in range(len(exact) - m) if exact[m + k] > exact[m] + exact[k]]
    print(f"subadditivity failures: {len(bad)}")
    for n in args.beam:
        rec = cn_beam(n, args.d, args.width, cache=cache)
        print(f"beam n={n}: c_n >= {rec.cn:.6f}, c_n/n >= {rec.cn / n:.6f}")


if __name__ == "__main__":
    main()
