"""The corrector xi_n(T), the cross-term sum chi_n(T) and its compensator.

With blocks ``I_{j,l} = [j + (l-1)T, j + lT]`` and
``I~_{j,l} = I_{j,1} u ... u I_{j,l}``:

* ``chi_n(T) = (1/T) sum_{j<T} sum_{l=1}^{floor(n/T)-1} chi_C(R(I~_{j,l}), R(I_{j,l+1}))``
* ``xi*_n(T)`` replaces each summand by its conditional mean given the past
  up to ``j + lT``, estimated here by fresh continuations.
* ``xi_n(T) = sum_{k<=n} sum_{x in R_k} e_{R_k}(x) phi_T(x - S_k)``.

Blocks that would run past time n are clipped at n, for the observed sum
and for the simulated continuations alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .capacity import equilibrium, extend
from .green import GreenCache, PhiTable, default_cache
from .lattice import PointSet, Walk, first_visit_times, make_rng, range_of

MAX_N = 2000

_PHI: dict = {}


def phi_table(d: int, T: int, cache: GreenCache | None = None, include_k0: bool = True) -> PhiTable:
    cache = cache or default_cache(d)
    key = (d, T, include_k0, id(cache))
    if key not in _PHI:
        _PHI[key] = PhiTable(d, T, cache, include_k0)
    return _PHI[key]


def _check(walk: Walk, T: int, max_n: int):
    if not 1 <= T <= max(walk.n, 1):
        raise ValueError(f"need 1 <= T <= n (T={T}, n={walk.n})")
    if walk.n > max_n:
        raise ValueError(f"n={walk.n} exceeds the size guard {max_n}")


@dataclass
class CorrectorTrace:
    T: int
    perStep: np.ndarray
    total: float = field(init=False)

    def __post_init__(self):
        self.total = float(self.perStep.sum())


def xi_n(walk: Walk, T: int, cache: GreenCache | None = None, include_k0: bool = True, max_n: int = MAX_N) -> CorrectorTrace:
    """Corrector trace using bordered updates of the equilibrium of R_k."""
    if walk.n:
        _check(walk, T, max_n)
    cache = cache or default_cache(walk.d)
    phi = phi_table(walk.d, T, cache, include_k0)
    pos = walk.positions
    sol = equilibrium(PointSet(pos[:1]), cache)
    pts = pos[:1].copy()
    out = np.empty(walk.n + 1)
    for k in range(walk.n + 1):
        if k and tuple(pos[k].tolist()) not in sol.set:
            sol = extend(sol, pos[k])
            pts = np.vstack([pts, pos[k : k + 1]])
        out[k] = float(sol.eq @ phi(pts - pos[k]))
    return CorrectorTrace(T, out)


def xi_n_bruteforce(walk: Walk, T: int, cache: GreenCache | None = None, include_k0: bool = True) -> CorrectorTrace:
    """Oracle: a fresh equilibrium solve of R_k at every k."""
    cache = cache or default_cache(walk.d)
    phi = phi_table(walk.d, T, cache, include_k0)
    out = np.empty(walk.n + 1)
    for k in range(walk.n + 1):
        sol = equilibrium(range_of(walk, 0, k), cache)
        out[k] = float(sol.eq @ phi(sol.set.array() - walk.positions[k]))
    return CorrectorTrace(T, out)


# ---------------------------------------------------------------------------
# block structure


def blocks(n: int, T: int, j: int) -> list[tuple[int, int]]:
    """``I_{j,l}`` for l = 1..floor(n/T), clipped at n."""
    return [(j + (l - 1) * T, min(j + l * T, n)) for l in range(1, n // T + 1)]


class _Prefix:
    """Prefix factorization of R[j, end] in first-visit order."""

    def __init__(self, walk: Walk, j: int, end: int, cache: GreenCache):
        seg = walk.positions[j : end + 1]
        sub = Walk(seg)
        first = first_visit_times(sub)
        self.points = seg[first]
        self.first = first + j  # absolute first-visit times
        self.time_of = {tuple(p): int(t) for p, t in zip(self.points.tolist(), self.first.tolist())}
        M = cache.matrix(self.points)
        self.L = linalg.cholesky(M, lower=True, check_finite=False)
        self.y = linalg.solve_triangular(self.L, np.ones(len(self.points)), lower=True, check_finite=False)
        self.caps = np.cumsum(self.y**2)

    def count(self, t: int) -> int:
        """Distinct sites of R[j, t]."""
        return int(np.searchsorted(self.first, t, side="right"))

    def cap(self, t: int) -> float:
        return float(self.caps[self.count(t) - 1])


def chi_n(walk: Walk, T: int, cache: GreenCache | None = None, max_n: int = MAX_N) -> float:
    """Observed cross-term sum over the shifted block decompositions."""
    _check(walk, T, max_n)
    cache = cache or default_cache(walk.d)
    n, nb = walk.n, walk.n // T
    if nb < 2:
        return 0.0
    total = 0.0
    for j in range(T):
        bl = blocks(n, T, j)
        pre = _Prefix(walk, j, bl[-1][1], cache)
        for l in range(1, nb):
            a, b = bl[l]
            capB = equilibrium(range_of(walk, a, b), cache).cap
            total += pre.cap(a) + capB - pre.cap(b)
    return total / T


def decomposition_gap(walk: Walk, T: int, cache: GreenCache | None = None) -> float:
    """``|Cap(R_n) - (1/T) sum_j Cap(R(I~_{j, floor(n/T)}))|``, at most T."""
    cache = cache or default_cache(walk.d)
    n = walk.n
    full = equilibrium(range_of(walk), cache).cap
    acc = 0.0
    for j in range(T):
        acc += equilibrium(range_of(walk, j, min(j + (n // T) * T, n)), cache).cap
    return abs(full - acc / T)


# ---------------------------------------------------------------------------
# compensator by nested Monte Carlo


def _cap_union(pre: _Prefix, m: int, new_pts: np.ndarray, cache: GreenCache) -> float:
    """Cap of the first m prefix points plus ``new_pts`` (all distinct)."""
    if len(new_pts) == 0:
        return float(pre.caps[m - 1])
    L = pre.L[:m, :m]
    W = linalg.solve_triangular(L, cache.matrix(pre.points[:m], new_pts), lower=True, check_finite=False)
    S = cache.matrix(new_pts) - W.T @ W
    L22 = linalg.cholesky(S, lower=True, check_finite=False)
    y2 = linalg.solve_triangular(L22, 1.0 - W.T @ pre.y[:m], lower=True, check_finite=False)
    return float(pre.caps[m - 1] + y2 @ y2)


def xi_star_mc(walk: Walk, T: int, inner: int = 100, seed: int = 0, task: int = 0, cache: GreenCache | None = None, max_n: int = MAX_N):
    """Nested Monte Carlo estimate of the compensator; returns ``(estimate, stderr)``."""
    if inner < 100:
        raise ValueError("inner >= 100 required")
    _check(walk, T, max_n)
    cache = cache or default_cache(walk.d)
    n, nb, d = walk.n, walk.n // T, walk.d
    if nb < 2:
        return 0.0, 0.0
    rng = make_rng(seed, task)
    est, var = 0.0, 0.0
    for j in range(T):
        bl = blocks(n, T, j)
        pre = _Prefix(walk, j, bl[nb - 2][1], cache)
        for l in range(1, nb):
            k = bl[l][0]
            length = bl[l][1] - k
            m = pre.count(k)
            capA = float(pre.caps[m - 1])
            steps = rng.integers(0, 2 * d, size=(inner, length))
            inc = np.zeros((inner, length + 1, d), dtype=np.int64)
            ii, tt = np.meshgrid(np.arange(inner), np.arange(1, length + 1), indexing="ij")
            inc[ii, tt, steps // 2] = 1 - 2 * (steps % 2)
            paths = walk.positions[k] + np.cumsum(inc, axis=1)
            vals = np.empty(inner)
            for s in range(inner):
                B = PointSet.from_array_unique(paths[s])
                capB = equilibrium(B, cache).cap
                newp = np.array([p for p in B.order if pre.time_of.get(p, n + 1) > k], dtype=np.int64).reshape(-1, d)
                vals[s] = capA + capB - _cap_union(pre, m, newp, cache)
            est += vals.mean()
            var += vals.var(ddof=1) / inner
    return est / T, math.sqrt(var) / T
