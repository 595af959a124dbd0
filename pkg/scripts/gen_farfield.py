"""Generate far-field expansion tables for the lattice Green's function.

The simple random walk has characteristic exponent
``psi(k) = 1 - (1/d) sum_i cos(k_i)``.  Expanding ``1/psi`` in homogeneous
pieces ``P(k) / |k|^{2m}`` and inverting each piece term by term gives

    G(x) ~ sum_g  r^{2 - d - 2g} * Q_g(u_1, u_2, ...)

with ``u_k = sum_i (x_i^2 / r^2)^k``.  Each group g is stored as a map from
partitions (tuples of k) to coefficients of ``prod u_k``, and a matching
straight-line numba evaluator is emitted.

Usage::

    python scripts/gen_farfield.py 3 5 7 > src/walkcap/_farfield.py
    python scripts/gen_farfield.py --recode src/walkcap/_farfield.py > new.py
"""

import argparse
import importlib.util
import random
import sys
import time

import sympy as sp
from sympy import QQ
from sympy.polys.rings import ring
from sympy.utilities.iterables import partitions

DEFAULT_ORDERS = 7


def inverse_psi_groups(orders):
    """Terms of ``(2d)^{-1} psi(k)^{-1}`` by relative degree.

    Group g is a list of ``(coef, js, m)`` meaning
    ``coef * prod_{j in js} q_j / q_1^m`` with ``q_j = sum_i k_i^{2j}``.
    """
    q = sp.symbols("q1:%d" % (orders + 3))
    eps = sp.Symbol("eps")
    u = sum((-1) ** j * 2 * q[j - 1] / sp.factorial(2 * j) * eps ** (j - 1) for j in range(2, orders + 2)) / q[0]
    series = sp.expand(sp.series(1 / (1 - u), eps, 0, orders).removeO())
    groups = []
    for g in range(orders):
        term = sp.expand(series.coeff(eps, g))
        items = []
        for mono, coef in sp.Poly(term * q[0] ** (g + 1), *q).terms():
            js = []
            for idx, power in enumerate(mono[1:], start=2):
                js += [idx] * power
            items.append((coef, tuple(js), g + 2 - mono[0]))
        groups.append(items)
    return groups


def farfield_polys(d, orders):
    """Per group: list of (constant, polynomial, r-power) summands."""
    R, *xs = ring(",".join("x%d" % i for i in range(d)), QQ)
    r2 = sum(x**2 for x in xs)

    def apply_op(p, gam, j):
        # sum_i d_i^{2j} (p r^gam), using d_i (p r^g) = (r^2 d_i p + g x_i p) r^(g-2)
        out = None
        for i in range(d):
            pi, gi = p, gam
            for _ in range(2 * j):
                pi, gi = r2 * pi.diff(xs[i]) + gi * xs[i] * pi, gi - 2
            out = pi if out is None else out + pi
        return out, gam - 4 * j

    half = sp.Rational(d, 2)
    result = []
    for grp in inverse_psi_groups(orders):
        parts = []
        for coef, js, m in grp:
            # inverse transform of |k|^{-2m}
            fm = sp.gamma(half - m) / (4**m * sp.pi**half * sp.gamma(m))
            p, gam = R(1), 2 * m - d
            for j in js:
                p, gam = apply_op(p, gam, j)
            # k_i^{2j} -> (-i d_i)^{2j} = (-1)^j d_i^{2j}
            parts.append(((-1) ** sum(js) * coef * fm, p, gam))
        result.append(parts)
    return result


def to_powersums(d, poly):
    """Coefficients of an even symmetric homogeneous polynomial in s_k = sum x_i^{2k}."""
    deg = max(sum(m) for m in poly.monoms())
    basis = []
    for part in partitions(deg // 2, k=d):
        lam = []
        for k, mult in part.items():
            lam += [k] * mult
        basis.append(tuple(sorted(lam)))
    rng = random.Random(12345)
    pts = [[rng.randint(-9, 9) for _ in range(d)] for _ in range(len(basis) + 8)]

    def s(pt, k):
        return sum(v ** (2 * k) for v in pt)

    A = sp.Matrix([[sp.prod([s(pt, k) for k in lam]) for lam in basis] for pt in pts])
    b = sp.Matrix([sp.Rational(poly(*pt)) for pt in pts])
    sol = (A.T * A).LUsolve(A.T * b)
    assert (A * sol - b).is_zero_matrix, "polynomial is not symmetric in the squares"
    return {lam: c for lam, c in zip(basis, sol) if c != 0}


def table_for(d, orders):
    out = []
    for g, parts in enumerate(farfield_polys(d, orders)):
        combined = {}
        for c, p, _ in parts:
            # p * r^gam with gam + deg(p) = 2 - d - 2g; dividing p by r^deg(p)
            # turns prod s_k into prod u_k
            for lam, v in to_powersums(d, p).items():
                # u_1 = 1 identically
                key = tuple(k for k in lam if k != 1)
                combined[key] = combined.get(key, 0) + c * v
        table = {lam: float(sp.N(2 * d * v, 30)) for lam, v in combined.items() if v != 0}
        out.append((2 - d - 2 * g, table))
    return out


def emit_evaluator(d, groups):
    kmax = max((max(lam) for _, t in groups for lam in t if lam), default=1)
    L = ["@numba.njit(cache=True)", f"def farfield_d{d}(c):"]
    L.append("    r2 = 0.0")
    L.append(f"    for i in range({d}):")
    L.append("        r2 += float(c[i]) * float(c[i])")
    L.append("    inv = 1.0 / r2")
    for k in range(1, kmax + 1):
        L.append(f"    u{k} = 0.0")
    L.append(f"    for i in range({d}):")
    L.append("        y = float(c[i]) * float(c[i]) * inv")
    L.append("        p = y")
    for k in range(1, kmax + 1):
        L.append(f"        u{k} += p")
        if k < kmax:
            L.append("        p *= y")
    for g, (_, table) in enumerate(groups):
        terms = []
        for lam, coef in sorted(table.items()):
            terms.append(f"{coef!r}" + "".join(f" * u{k}" for k in lam))
        L.append(f"    g{g} = " + (" + ".join(terms) if terms else "0.0"))
    expr = f"g{len(groups) - 1}"
    for g in range(len(groups) - 2, -1, -1):
        expr = f"({expr}) * inv + g{g}"
    L.append(f"    tot = {expr}")
    if d % 2:
        L.append(f"    return tot * inv ** {(d - 3) // 2} / math.sqrt(r2)")
    else:
        L.append(f"    return tot * inv ** {(d - 2) // 2}")
    return "\n".join(L)


def write_module(tables, out):
    w = out.write
    w('"""Far-field expansion tables; generated by scripts/gen_farfield.py, do not edit."""\n\n')
    w("import math\n\nimport numba\nimport numpy as np\n\n")
    w("# d -> list of (degree, {partition: coefficient}); group value is\n")
    w("# r^degree * sum coefficient * prod_k u_k, u_k = sum_i (x_i^2/r^2)^k\n")
    w("TABLES = {\n")
    for d, tab in sorted(tables.items()):
        w(f"    {d}: [\n")
        for deg, coefs in tab:
            items = ", ".join(f"{lam!r}: {c!r}" for lam, c in sorted(coefs.items()))
            w(f"        ({deg}, {{{items}}}),\n")
        w("    ],\n")
    w("}\n\n\n")
    for d, tab in sorted(tables.items()):
        w(emit_evaluator(d, tab) + "\n\n\n")
    w("@numba.njit(cache=True)\ndef farfield(c):\n    d = c.shape[0]\n")
    for d in sorted(tables):
        w(f"    if d == {d}:\n        return farfield_d{d}(c)\n")
    w("    return np.nan\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("dims", nargs="*", type=int, default=[3, 5, 7])
    ap.add_argument("--orders", type=int, default=DEFAULT_ORDERS)
    ap.add_argument("--recode", help="re-emit evaluators from an existing generated module")
    args = ap.parse_args(argv)
    if args.recode:
        spec = importlib.util.spec_from_file_location("_ff_old", args.recode)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
        write_module(mod.TABLES, sys.stdout)
        return
    tables = {}
    for d in args.dims:
        t0 = time.time()
        tables[d] = table_for(d, args.orders)
        print(f"d={d} done in {time.time() - t0:.1f}s", file=sys.stderr)
    write_module(tables, sys.stdout)


if __name__ == "__main__":
    main()
