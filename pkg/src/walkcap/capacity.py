"""Capacity and equilibrium measure of finite lattice sets.

The equilibrium measure solves the last-exit system
``sum_y G(x - y) e_A(y) = 1`` for x in A, and ``Cap(A) = sum e_A``.  With a
Cholesky factor ``M = L L^T`` of the Green matrix and ``y = L^{-1} 1`` we
have ``Cap(A) = |y|^2``; leading blocks of L factor leading principal
submatrices, so one factorization of a range ordered by first visit gives
``Cap(R_k)`` for every k.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import linalg

from .green import GreenCache, default_cache
from .lattice import PointSet, Walk, cube_bounds, cube_points, first_visit_times, make_rng

log = logging.getLogger(__name__)

SOLVER_CAP = 8192
RESIDUAL_TOL = 1e-9


class CapacityError(RuntimeError):
    pass


def _cache_for(d: int, cache: GreenCache | None) -> GreenCache:
    if cache is None:
        return default_cache(d)
    if cache.d != d:
        raise ValueError(f"cache is for d={cache.d}, points have d={d}")
    return cache


def _cholesky(M: np.ndarray) -> np.ndarray:
    try:
        return linalg.cholesky(M, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        cond = np.linalg.cond(M) if M.shape[0] <= 2000 else float("nan")
        raise CapacityError(f"Green matrix not numerically SPD (size {M.shape[0]}, cond ~ {cond:.3e})") from exc


@dataclass
class EquilibriumSolution:
    """Equilibrium measure of ``set`` with a growable Cholesky factor."""

    set: PointSet
    eq: np.ndarray
    cap: float
    residual: float
    cache: GreenCache = field(repr=False)
    _L: np.ndarray = field(repr=False, default=None)  # buffer, lower factor in [:m, :m]
    _y: np.ndarray = field(repr=False, default=None)
    refactorizations: int = 0

    @property
    def size(self) -> int:
        return len(self.set)

    @property
    def L(self) -> np.ndarray:
        m = self.size
        return self._L[:m, :m]

    def eq_map(self) -> dict:
        return dict(zip(self.set.order, self.eq.tolist()))

    def measure_of(self, points) -> np.ndarray:
        """e_A at each given point (0 off the set)."""
        idx = self.set._index
        return np.array([self.eq[idx[tuple(p)]] if tuple(p) in idx else 0.0 for p in np.asarray(points).tolist()])


def _from_factor(A: PointSet, L: np.ndarray, cache: GreenCache, M: np.ndarray | None, tol: float):
    m = L.shape[0]
    one = np.ones(m)
    y = linalg.solve_triangular(L, one, lower=True, check_finite=False)
    e = linalg.solve_triangular(L, y, lower=True, trans="T", check_finite=False)
    res = float("nan")
    if M is not None:
        r = one - M @ e
        res = float(np.abs(r).max())
        if res > tol:
            # one step of iterative refinement
            e = e + linalg.cho_solve((L, True), r, check_finite=False)
            y = L.T @ e
            res = float(np.abs(one - M @ e).max())
            if res > tol:
                raise CapacityError(f"last-exit residual {res:.3e} exceeds {tol:.1e} for |A|={m}")
    buf = np.zeros((max(2 * m, 16), max(2 * m, 16)))
    buf[:m, :m] = L
    ybuf = np.zeros(buf.shape[0])
    ybuf[:m] = y
    return EquilibriumSolution(A, e, float(y @ y), res, cache, buf, ybuf)


def equilibrium(A, cache: GreenCache | None = None, tol: float = RESIDUAL_TOL, cap_size: int = SOLVER_CAP) -> EquilibriumSolution:
    """Equilibrium measure and capacity of a nonempty finite set."""
    if not isinstance(A, PointSet):
        A = PointSet(A)
    m = len(A)
    if m == 0:
        raise ValueError("equilibrium of the empty set is undefined (capacity is 0)")
    if m > cap_size:
        raise ValueError(f"|A|={m} exceeds solver cap {cap_size}")
    cache = _cache_for(A.d, cache)
    M = cache.matrix(A.array())
    L = _cholesky(M)
    return _from_factor(A, L, cache, M, tol)


def capacity(A, cache: GreenCache | None = None) -> float:
    """Newtonian capacity; 0 for the empty set."""
    if not isinstance(A, PointSet):
        A = PointSet(A)
    if len(A) == 0:
        return 0.0
    cache = _cache_for(A.d, cache)
    if len(A) == 1:
        return 1.0 / cache.G0()
    return equilibrium(A, cache).cap


def extend(sol: EquilibriumSolution, p, compute_eq: bool = True) -> EquilibriumSolution:
    """Equilibrium of ``A + {p}`` by a bordered Cholesky update (in place).

    The returned object shares storage with ``sol``; ``sol`` must not be
    used afterwards.  Falls back to a full refactorization when the Schur
    complement is not safely positive.
    """
    p = tuple(int(v) for v in p)
    if p in sol.set:
        raise ValueError(f"{p} already in the set")
    return extend_many(sol, [p], compute_eq)


def extend_many(sol: EquilibriumSolution, points, compute_eq: bool = True) -> EquilibriumSolution:
    """Block version of :func:`extend` for several new distinct points."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    m, k = sol.size, pts.shape[0]
    for p in pts.tolist():
        if not sol.set.add(p):
            raise ValueError(f"{tuple(p)} already in the set")
    cache = sol.cache
    old = np.array(sol.set.order[:m], dtype=np.int64)
    B = cache.matrix(old, pts)  # m x k
    C = cache.matrix(pts)
    if m + k > sol._L.shape[0]:
        size = max(2 * (m + k), 16)
        buf = np.zeros((size, size))
        buf[:m, :m] = sol._L[:m, :m]
        ybuf = np.zeros(size)
        ybuf[:m] = sol._y[:m]
        sol._L, sol._y = buf, ybuf
    L = sol._L[:m, :m]
    W = linalg.solve_triangular(L, B, lower=True, check_finite=False) if m else np.zeros((0, k))
    S = C - W.T @ W
    ok = True
    try:
        L22 = linalg.cholesky(S, lower=True, check_finite=False)
        if np.min(np.diag(L22)) ** 2 < 1e-12 * np.max(np.diag(C)):
            ok = False
    except linalg.LinAlgError:
        ok = False
    if not ok:
        log.warning("bordered update lost positive definiteness at size %d; refactorizing", m + k)
        full = equilibrium(sol.set, cache)
        full.refactorizations = sol.refactorizations + 1
        sol.__dict__.update(full.__dict__)
        return sol
    sol._L[m : m + k, :m] = W.T
    sol._L[m : m + k, m : m + k] = L22
    ynew = linalg.solve_triangular(L22, 1.0 - W.T @ sol._y[:m], lower=True, check_finite=False)
    sol._y[m : m + k] = ynew
    yy = sol._y[: m + k]
    sol.cap = float(yy @ yy)
    if compute_eq:
        sol.eq = linalg.solve_triangular(sol._L[: m + k, : m + k], yy, lower=True, trans="T", check_finite=False)
    else:
        sol.eq = None
    sol.residual = float("nan")
    return sol


def refresh_eq(sol: EquilibriumSolution) -> np.ndarray:
    m = sol.size
    sol.eq = linalg.solve_triangular(sol._L[:m, :m], sol._y[:m], lower=True, trans="T", check_finite=False)
    return sol.eq


def prefix_capacities(points, cache: GreenCache | None = None) -> np.ndarray:
    """``Cap({p_0..p_{j}})`` for every j from one factorization."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    if pts.shape[0] == 0:
        return np.zeros(0)
    cache = _cache_for(pts.shape[1], cache)
    M = cache.matrix(pts)
    # factor in place to keep peak memory at one matrix
    L = linalg.cholesky(M, lower=True, overwrite_a=True, check_finite=False)
    y = linalg.solve_triangular(L, np.ones(pts.shape[0]), lower=True, check_finite=False, overwrite_b=True)
    return np.cumsum(y * y)


def range_capacity_curve(walk: Walk, times, cache: GreenCache | None = None) -> np.ndarray:
    """``Cap(R[0, k])`` at each requested time k."""
    first = first_visit_times(walk)
    caps = prefix_capacities(walk.positions[first], cache)
    times = np.asarray(times, dtype=np.int64)
    # number of distinct sites by time k
    count = np.searchsorted(first, times, side="right")
    return caps[count - 1]


def cube_capacity(r: int, d: int = 5, cache: GreenCache | None = None, chunk: int = 4096) -> float:
    """Exact ``Cap(Q(0, r))`` for cubes too large for a dense solve.

    A walk from far away hits the cube exactly when it hits the inner
    boundary, so both have the same capacity.  The equilibrium measure is
    constant on orbits of the cube's symmetry group; the last-exit system
    is solved with one unknown per orbit.
    """
    if r < 1:
        raise ValueError("r >= 1 required")
    cache = _cache_for(d, cache)
    pts = cube_points(np.zeros(d, dtype=np.int64), r)
    lo, hi = cube_bounds(np.zeros(d, dtype=np.int64), r)
    bd = pts[np.any((pts == lo) | (pts == hi), axis=1)]
    # doubled coordinates around the cube centre; orbits are sorted |u|
    u = np.sort(np.abs(2 * bd - (lo + hi)), axis=1)
    _, first, inv, sizes = np.unique(u, axis=0, return_index=True, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    reps = bd[first]
    k = len(reps)
    A = np.zeros((k, k))
    for s in range(0, len(bd), chunk):
        M = cache.matrix(reps, bd[s : s + chunk])
        for j in range(k):
            sel = inv[s : s + chunk] == j
            if sel.any():
                A[:, j] += M[:, sel].sum(axis=1)
    e = linalg.solve(A, np.ones(k), check_finite=False)
    return float(sizes @ e)


# ---------------------------------------------------------------------------
# Monte Carlo escape estimator


@numba.njit(cache=True)
def _escape_walks(starts, occ, lo, center, R2, nwalks, seed, max_steps):
    np.random.seed(seed)
    d = starts.shape[1]
    shape = occ.shape
    hits = 0
    x = np.empty(d, dtype=np.int64)
    for w in range(nwalks):
        s = np.random.randint(0, starts.shape[0])
        for i in range(d):
            x[i] = starts[s, i]
        escaped = False
        for _ in range(max_steps):
            c = np.random.randint(0, 2 * d)
            x[c // 2] += 1 - 2 * (c % 2)
            r2 = 0.0
            inside = True
            flat = 0
            for i in range(d):
                dv = x[i] - center[i]
                r2 += dv * dv
                j = x[i] - lo[i]
                if j < 0 or j >= shape[i]:
                    inside = False
                else:
                    flat = flat * shape[i] + j
            if inside and occ.ravel()[flat]:
                break
            if r2 > R2:
                escaped = True
                break
        if escaped:
            hits += 1
    return hits


@dataclass
class MCCapacity:
    estimate: float
    stderr: float
    biasBound: float
    walks: int
    escapeRadius: float


# upper constant C in G(x) <= C / (|x|^{d-2} + 1); see green.GREEN_BOUNDS
def _green_upper_constant(d: int) -> float:
    from .green import GREEN_BOUNDS

    if d in GREEN_BOUNDS:
        return GREEN_BOUNDS[d][1]
    return 1.0


def capacity_mc(A, walks: int, escapeRadius: float, seed: int = 0, task: int = 0, max_steps: int = 10**8) -> MCCapacity:
    """Estimate ``Cap(A)`` by escape to a ball of radius ``escapeRadius``.

    Walks start at uniformly chosen points of A; the estimator counts those
    leaving the ball (centred at the box centre of A) before returning to A.
    This over-counts by walks that exit and later return; with
    ``rad = max |a - centre|`` that excess is at most
    ``Cap(A) * C / (escapeRadius - rad)^{d-2}`` per unit estimate.
    """
    if walks <= 0:
        raise ValueError("walks must be positive")
    if not isinstance(A, PointSet):
        A = PointSet(A)
    pts = A.array()
    d = A.d
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diam = float(np.sqrt(((hi - lo) ** 2).sum()))
    if escapeRadius < 4 * max(diam, 1.0):
        raise ValueError("escapeRadius must be at least 4 diam(A)")
    center = (lo + hi) // 2
    rad = float(np.sqrt(((pts - center) ** 2).sum(axis=1)).max())
    occ = np.zeros(tuple((hi - lo + 1).tolist()), dtype=np.bool_)
    occ[tuple((pts - lo).T)] = True
    nseed = int(make_rng(seed, task).integers(0, 2**31 - 1))
    hits = _escape_walks(pts, occ, lo, center, float(escapeRadius) ** 2, int(walks), nseed, max_steps)
    p = hits / walks
    est = len(A) * p
    se = len(A) * math.sqrt(max(p * (1 - p), 0.0) / walks)
    cap_up = est + 3 * se
    bias = est * cap_up * _green_upper_constant(d) / (escapeRadius - rad) ** (d - 2)
    return MCCapacity(est, se, bias, walks, escapeRadius)
