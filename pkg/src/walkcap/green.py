"""Lattice Green's function G, truncations G_T, and the kernel phi_T.

Evaluation paths
----------------
* Quadrature of ``G(x) = int_0^inf prod_i ive(|x_i|, t/d) dt`` (``ive`` is the
  exponentially scaled modified Bessel function) with composite
  Gauss-Legendre in ``s = log t`` and an analytic large-t tail.
* A far-field expansion in power sums of the coordinates (odd d only),
  used beyond a per-dimension radius where it is more accurate than the
  precision target.
* Exact dynamic programming for ``p_n(x) = P(S_n = x)``, giving G_T and
  an independent check of G through partial sums plus extrapolation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numba
import numpy as np
from scipy import special

from ._farfield import TABLES as _FF_TABLES
from ._farfield import farfield as _ff_eval


class GreenQuadratureError(RuntimeError):
    pass


class DPTooLarge(MemoryError):
    pass


# ---------------------------------------------------------------------------
# quadrature

ZMAX = 1.0e8  # scipy's ive loses accuracy far beyond this argument
_S_MIN = -37.0
_GL_ORDER = 16


def _nodes(d: int, panel: float = 1.0):
    smax = math.log(d * ZMAX)
    npan = int(math.ceil((smax - _S_MIN) / panel))
    edges = np.linspace(_S_MIN, smax, npan + 1)
    gx, gw = np.polynomial.legendre.leggauss(_GL_ORDER)
    half = np.diff(edges) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    s = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    t = np.exp(s)
    return t / d, w * t


def _tail(canon: np.ndarray, d: int) -> np.ndarray:
    """Integral over ``t > d*ZMAX`` from the large-argument Bessel expansion."""
    mu = 4.0 * canon.astype(np.float64) ** 2
    c1 = (mu - 1) / 8
    c2 = (mu - 1) * (mu - 9) / 128
    C1 = c1.sum(axis=-1)
    C2 = c2.sum(axis=-1) + (C1**2 - (c1**2).sum(axis=-1)) / 2
    Z = ZMAX
    a = d / 2
    return d * (2 * np.pi) ** (-a) * (Z ** (1 - a) / (a - 1) - C1 * Z ** (-a) / a + C2 * Z ** (-a - 1) / (a + 1))


@numba.njit(cache=True)
def _gl_sums(canon, table, wt):
    m, d = canon.shape
    nn = wt.shape[0]
    out = np.empty(m)
    prod = np.empty(nn)
    for a in range(m):
        for k in range(nn):
            prod[k] = wt[k]
        for i in range(d):
            row = canon[a, i]
            for k in range(nn):
                prod[k] *= table[row, k]
        s = 0.0
        for k in range(nn):
            s += prod[k]
        out[a] = s
    return out


class _Quadrature:
    def __init__(self, d: int, panel: float = 1.0):
        self.d = d
        self.z, self.wt = _nodes(d, panel)
        self.table = np.zeros((0, self.z.size))
        self.lock = threading.Lock()

    def _ensure(self, kmax: int):
        with self.lock:
            have = self.table.shape[0]
            if kmax < have:
                return
            new = max(kmax + 1, 2 * have, 64)
            orders = np.arange(have, new, dtype=np.float64)
            rows = special.ive(orders[:, None], self.z[None, :])
            rows = np.nan_to_num(rows, nan=0.0)
            self.table = np.vstack([self.table, rows])

    def __call__(self, canon: np.ndarray) -> np.ndarray:
        canon = np.ascontiguousarray(canon, dtype=np.int64)
        if canon.size == 0:
            return np.zeros(canon.shape[0])
        self._ensure(int(canon.max()))
        return _gl_sums(canon, self.table, self.wt) + _tail(canon, self.d)


_QUAD: dict = {}


def _quadrature(d: int, panel: float = 1.0) -> _Quadrature:
    key = (d, panel)
    if key not in _QUAD:
        _QUAD[key] = _Quadrature(d, panel)
    return _QUAD[key]


def green_quadrature(points, d: int | None = None, verify: bool = False, rtol: float = 1e-10) -> np.ndarray:
    """G at each row of ``points`` by quadrature (no caching).

    With ``verify`` the result is recomputed on panels of half width and a
    ``GreenQuadratureError`` is raised if the two disagree beyond ``rtol``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    d = pts.shape[1] if d is None else d
    if d < 3:
        raise ValueError("the Green's function is finite only for d >= 3")
    canon = np.sort(np.abs(pts), axis=1)
    val = _quadrature(d)(canon)
    if verify:
        ref = _quadrature(d, 0.5)(canon)
        err = np.abs(val - ref) / np.abs(ref)
        bad = np.flatnonzero(~(err <= rtol))
        if bad.size:
            i = bad[np.argmax(err[bad])]
            raise GreenQuadratureError(
                f"quadrature disagreement {err[i]:.3e} > {rtol:.1e} at x={canon[i].tolist()}: "
                f"{val[i]!r} vs refined {ref[i]!r}"
            )
    return val


# ---------------------------------------------------------------------------
# far field


# radius beyond which the expansion is used; chosen so the truncation error
# measured against quadrature stays below 1e-11 relative (tests/test_green.py)
FAR_RADIUS = {3: 20.0, 5: 25.0, 7: 30.0}


def has_farfield(d: int) -> bool:
    return d in _FF_TABLES and d in FAR_RADIUS


@numba.njit(cache=True)
def _farfield_many(pts):
    out = np.empty(pts.shape[0])
    for a in range(pts.shape[0]):
        out[a] = _ff_eval(pts[a])
    return out


def green_farfield(points, d: int | None = None) -> np.ndarray:
    """Asymptotic expansion of G; accurate only for large ``|x|``."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    d = pts.shape[1] if d is None else d
    if d not in _FF_TABLES:
        raise ValueError(f"no far-field table for d={d}")
    return _farfield_many(np.ascontiguousarray(pts))


# ---------------------------------------------------------------------------
# canonical ranks: multiset rank of the sorted absolute coordinates


def _binom_table(d: int, amax: int) -> np.ndarray:
    tab = np.zeros((amax + 1, d + 1), dtype=np.int64)
    for a in range(amax + 1):
        for i in range(min(a, d) + 1):
            tab[a, i] = math.comb(a, i)
    return tab


def rank_limit(d: int) -> int:
    """Largest coordinate bound c for which every rank fits in int64."""
    lo, hi = 1, 1 << 20
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if math.comb(mid + d, d) < 2**62:
            lo = mid
        else:
            hi = mid - 1
    return lo


@numba.njit(cache=True)
def _rank_sorted(c, binom):
    r = 0
    for i in range(c.shape[0]):
        r += binom[c[i] + i, i + 1]
    return r


@numba.njit(cache=True)
def _ranks(canon, binom):
    out = np.empty(canon.shape[0], dtype=np.int64)
    for a in range(canon.shape[0]):
        out[a] = _rank_sorted(canon[a], binom)
    return out


@numba.njit(cache=True)
def _unrank(ranks, d, binom):
    out = np.empty((ranks.shape[0], d), dtype=np.int64)
    amax = binom.shape[0] - 1
    for a in range(ranks.shape[0]):
        r = ranks[a]
        for i in range(d - 1, -1, -1):
            # largest m with C(m + i, i + 1) <= r
            lo, hi = 0, amax - i
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if binom[mid + i, i + 1] <= r:
                    lo = mid
                else:
                    hi = mid - 1
            out[a, i] = lo
            r -= binom[lo + i, i + 1]
    return out


def canonicalize(points) -> np.ndarray:
    return np.sort(np.abs(np.atleast_2d(np.asarray(points, dtype=np.int64))), axis=1)


# ---------------------------------------------------------------------------
# the cache
#
# Canonical points are keyed by their multiset rank.  When a far-field
# expansion exists every cached point lies inside the far radius, so a dense
# rank-indexed array (NaN = unknown) covers them; nearby canonical points
# have nearby ranks, which keeps lookups cache friendly.  Otherwise an
# open-addressing hash keyed by rank is used.

_EMPTY = -1


@numba.njit(cache=True)
def _slot(keys, r):
    mask = keys.shape[0] - 1
    h = (np.uint64(r) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(20)
    i = np.int64(h & np.uint64(mask))
    while keys[i] != _EMPTY and keys[i] != r:
        i = (i + 1) & mask
    return i


@numba.njit(cache=True)
def _get(dense, keys, vals, r):
    if r < dense.shape[0]:
        return dense[r]
    i = _slot(keys, r)
    return vals[i] if keys[i] == r else np.nan


@numba.njit(cache=True)
def _get_many(dense, keys, vals, ranks):
    out = np.empty(ranks.shape[0])
    for a in range(ranks.shape[0]):
        out[a] = _get(dense, keys, vals, ranks[a])
    return out


@numba.njit(cache=True)
def _put_many(dense, keys, vals, ranks, v):
    added = 0
    for a in range(ranks.shape[0]):
        r = ranks[a]
        if r < dense.shape[0]:
            if np.isnan(dense[r]):
                dense[r] = v[a]
                added += 1
            continue
        i = _slot(keys, r)
        if keys[i] != r:
            keys[i] = r
            vals[i] = v[a]
            added += 1
    return added


@dataclass
class GreenCache:
    """Memo of G over canonical points (sorted absolute coordinates).

    Inserts are idempotent, so concurrent fillers store identical results.
    Points beyond the far-field radius are evaluated by the expansion and
    not stored.
    """

    d: int = 5
    precisionTarget: float = 1e-10
    use_farfield: bool = True

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("d >= 3 required")
        self.cmax = min(rank_limit(self.d), 1 << 16)
        self.binom = _binom_table(self.d, self.cmax + self.d)
        self.far_r2 = FAR_RADIUS[self.d] ** 2 if (self.use_farfield and has_farfield(self.d)) else np.inf
        if np.isfinite(self.far_r2):
            K = int(math.ceil(math.sqrt(self.far_r2)))
            self._dense = np.full(math.comb(K + self.d - 1, self.d), np.nan)
        else:
            self._dense = np.zeros(0)
        self._keys = np.full(1 << 12, _EMPTY, dtype=np.int64)
        self._vals = np.zeros(1 << 12)
        self._count = 0
        self._hcount = 0
        self._extra: dict = {}
        self._lock = threading.Lock()
        self.quad_evals = 0

    # -- rank store ---------------------------------------------------------
    def _grow(self, need: int):
        cap = self._keys.size
        if 2 * (self._hcount + need) <= cap:
            return
        while 2 * (self._hcount + need) > cap:
            cap *= 2
        live = self._keys != _EMPTY
        k, v = self._keys[live], self._vals[live]
        self._keys = np.full(cap, _EMPTY, dtype=np.int64)
        self._vals = np.zeros(cap)
        _put_many(np.zeros(0), self._keys, self._vals, k, v)

    def _insert(self, ranks: np.ndarray, vals: np.ndarray):
        ranks = np.ascontiguousarray(ranks, dtype=np.int64)
        vals = np.ascontiguousarray(vals, dtype=np.float64)
        with self._lock:
            nh = int((ranks >= self._dense.size).sum())
            self._grow(nh)
            self._count += _put_many(self._dense, self._keys, self._vals, ranks, vals)
            self._hcount += nh

    def _lookup_ranks(self, ranks: np.ndarray) -> np.ndarray:
        """Values for an array of ranks, computing the missing ones."""
        ranks = np.ascontiguousarray(ranks, dtype=np.int64)
        out = _get_many(self._dense, self._keys, self._vals, ranks)
        miss = np.isnan(out)
        if miss.any():
            uniq, inv = np.unique(ranks[miss], return_inverse=True)
            v = green_quadrature(_unrank(uniq, self.d, self.binom), self.d)
            self.quad_evals += uniq.size
            self._insert(uniq, v)
            out[miss] = v[inv]
        return out

    def __len__(self):
        return self._count + len(self._extra)

    def items(self):
        """(canonical points, values) of every stored entry."""
        dk = np.flatnonzero(~np.isnan(self._dense))
        live = self._keys != _EMPTY
        k = np.concatenate([dk, self._keys[live]])
        vals = np.concatenate([self._dense[dk], self._vals[live]])
        canon = _unrank(k, self.d, self.binom) if k.size else np.zeros((0, self.d), np.int64)
        if self._extra:
            canon = np.vstack([canon, np.array(list(self._extra), dtype=np.int64)])
            vals = np.concatenate([vals, np.array(list(self._extra.values()))])
        return canon, vals

    # -- public -------------------------------------------------------------
    def values(self, points) -> np.ndarray:
        """G at each row of ``points``."""
        canon = canonicalize(points)
        if canon.shape[1] != self.d:
            raise ValueError("dimension mismatch")
        out = np.empty(canon.shape[0])
        r2 = (canon.astype(np.float64) ** 2).sum(axis=1)
        far = r2 >= self.far_r2
        if far.any():
            out[far] = _farfield_many(np.ascontiguousarray(canon[far]))
        huge = (~far) & (canon[:, -1] > self.cmax)
        near = ~(far | huge)
        if near.any():
            out[near] = self._lookup_ranks(_ranks(canon[near], self.binom))
        for a in np.flatnonzero(huge):
            key = tuple(canon[a].tolist())
            if key not in self._extra:
                self._extra[key] = float(green_quadrature(canon[a : a + 1], self.d)[0])
            out[a] = self._extra[key]
        return out

    def __call__(self, x) -> float:
        return float(self.values(np.asarray(x, dtype=np.int64).reshape(1, -1))[0])

    green = __call__

    def G0(self) -> float:
        return self(np.zeros(self.d, dtype=np.int64))

    def contains(self, x) -> bool:
        c = canonicalize(x)
        if c[0, -1] > self.cmax:
            return tuple(c[0].tolist()) in self._extra
        return not np.isnan(_get_many(self._dense, self._keys, self._vals, _ranks(c, self.binom))[0])

    # -- Green matrices -----------------------------------------------------
    def matrix(self, points, other=None) -> np.ndarray:
        """``[G(x - y)]`` for rows x of ``points`` and y of ``other``."""
        P = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.int64)))
        sym = other is None
        Q = P if sym else np.ascontiguousarray(np.atleast_2d(np.asarray(other, dtype=np.int64)))
        if P.shape[0] == 0 or Q.shape[0] == 0:
            return np.zeros((P.shape[0], Q.shape[0]))
        span = int(max(P.max(), Q.max()) - min(P.min(), Q.min()))
        if span > self.cmax and not np.isfinite(self.far_r2):
            diff = (P[:, None, :] - Q[None, :, :]).reshape(-1, self.d)
            return self.values(diff).reshape(P.shape[0], Q.shape[0])
        M, ii, jj, rk = _matrix_kernel(P, Q, sym, float(self.far_r2), self.binom, self._dense, self._keys, self._vals)
        if rk.size:
            _scatter(M, ii, jj, self._lookup_ranks(rk))
        if sym:
            _mirror(M)
        return M

    # -- persistence --------------------------------------------------------
    def save(self, path):
        canon, vals = self.items()
        with open(path, "w") as fh:
            for c, v in zip(canon.tolist(), vals.tolist()):
                fh.write(" ".join(map(str, c)) + f" {v!r}\n")

    def load(self, path, check: bool = True, tol: float = 1e-9):
        """Load values from text lines ``x1 .. xd value``.

        With ``check`` every loaded value is verified by the harmonicity
        residual, computed with freshly evaluated neighbours.
        """
        rows = [ln.split() for ln in open(path) if ln.strip()]
        if not rows:
            return 0
        canon = canonicalize([[int(v) for v in r[: self.d]] for r in rows])
        vals = np.array([float(r[self.d]) for r in rows])
        if check:
            fresh = GreenCache(self.d, self.precisionTarget, self.use_farfield)
            res = harmonicity_residual(canon, fresh, center_values=vals)
            bad = np.abs(res) > tol
            if bad.any():
                raise ValueError(f"{path}: {int(bad.sum())} cached values fail the harmonicity check")
        small = canon[:, -1] <= self.cmax
        self._insert(_ranks(canon[small], self.binom), vals[small])
        for c, v in zip(canon[~small].tolist(), vals[~small].tolist()):
            self._extra[tuple(c)] = v
        return len(rows)


@numba.njit(cache=True)
def _matrix_kernel(P, Q, sym, far_r2, binom, dense, keys, vals):
    # for sym only the upper triangle is filled; _mirror completes it
    m, d = P.shape
    q = Q.shape[0]
    M = np.empty((m, q))
    c = np.empty(d, dtype=np.int64)
    cap = 1024
    ii = np.empty(cap, dtype=np.int64)
    jj = np.empty(cap, dtype=np.int64)
    rk = np.empty(cap, dtype=np.int64)
    cnt = 0
    for a in range(m):
        b0 = a if sym else 0
        for b in range(b0, q):
            r2 = 0.0
            for i in range(d):
                v = P[a, i] - Q[b, i]
                if v < 0:
                    v = -v
                c[i] = v
                r2 += float(v) * float(v)
            if r2 >= far_r2:
                M[a, b] = _ff_eval(c)
                continue
            for i in range(1, d):
                key = c[i]
                j = i - 1
                while j >= 0 and c[j] > key:
                    c[j + 1] = c[j]
                    j -= 1
                c[j + 1] = key
            r = _rank_sorted(c, binom)
            val = _get(dense, keys, vals, r)
            if np.isnan(val):
                if cnt == cap:
                    cap *= 2
                    ii2 = np.empty(cap, dtype=np.int64)
                    jj2 = np.empty(cap, dtype=np.int64)
                    rk2 = np.empty(cap, dtype=np.int64)
                    ii2[:cnt] = ii[:cnt]
                    jj2[:cnt] = jj[:cnt]
                    rk2[:cnt] = rk[:cnt]
                    ii, jj, rk = ii2, jj2, rk2
                ii[cnt] = a
                jj[cnt] = b
                rk[cnt] = r
                cnt += 1
            M[a, b] = val
    return M, ii[:cnt], jj[:cnt], rk[:cnt]


@numba.njit(cache=True)
def _scatter(M, ii, jj, v):
    for t in range(ii.shape[0]):
        M[ii[t], jj[t]] = v[t]


@numba.njit(cache=True)
def _mirror(M):
    # blocked copy of the upper triangle into the lower one
    n = M.shape[0]
    bs = 64
    for i0 in range(0, n, bs):
        for j0 in range(0, i0 + 1, bs):
            for i in range(i0, min(i0 + bs, n)):
                for j in range(j0, min(j0 + bs, i)):
                    M[i, j] = M[j, i]


_CACHES: dict = {}


def default_cache(d: int = 5) -> GreenCache:
    """Process-wide shared cache for dimension d."""
    if d not in _CACHES:
        _CACHES[d] = GreenCache(d)
    return _CACHES[d]


def green(x, cache: GreenCache | None = None) -> float:
    """G(x) to the cache's precision target."""
    x = np.asarray(x, dtype=np.int64).ravel()
    cache = cache or default_cache(x.size)
    return cache(x)


def harmonicity_residual(points, cache: GreenCache, center_values=None) -> np.ndarray:
    """``(1/2d) sum_e G(x+e) - G(x) + 1{x=0}`` at each point.

    ``center_values`` replaces G(x) (used to vet externally supplied values).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    d = pts.shape[1]
    E = np.concatenate([np.eye(d, dtype=np.int64), -np.eye(d, dtype=np.int64)])
    nb = (pts[:, None, :] + E[None, :, :]).reshape(-1, d)
    gn = cache.values(nb).reshape(len(pts), 2 * d)
    gx = cache.values(pts) if center_values is None else np.asarray(center_values, dtype=np.float64)
    delta = np.all(pts == 0, axis=1).astype(float)
    return gn.mean(axis=1) - gx + delta


# ---------------------------------------------------------------------------
# walk probabilities by dynamic programming


def _lgam(nmax: int) -> np.ndarray:
    return special.gammaln(np.arange(nmax + 2) + 1.0)


@numba.njit(cache=True)
def _one_dim(a, N, lg):
    """q_m(a) = P(1-d SRW at a after m steps), m = 0..N."""
    out = np.zeros(N + 1)
    a = abs(a)
    for m in range(a, N + 1, 2):
        k = (m + a) // 2
        out[m] = math.exp(lg[m] - lg[k] - lg[m - k] - m * math.log(2.0))
    return out


# binomial weights below exp(-72) of the mode are dropped
_BAND_SIGMAS = 12.0


@numba.njit(cache=True)
def _combine(f, q, j, parity_a, lg):
    """g(n) = sum_m C(n, m) (1/j)^m (1 - 1/j)^(n - m) q(m) f(n - m).

    Weights are formed on the fly over a band of the binomial mode.
    """
    N = f.shape[0] - 1
    g = np.zeros(N + 1)
    pr = 1.0 / j
    lp = math.log(pr)
    lq = math.log(1.0 - pr)
    for n in range(N + 1):
        sd = math.sqrt(n * pr * (1.0 - pr))
        lo = int(n * pr - _BAND_SIGMAS * sd) - 2
        hi = int(n * pr + _BAND_SIGMAS * sd) + 2
        if lo < parity_a:
            lo = parity_a
        if (lo - parity_a) % 2:
            lo += 1
        if hi > n:
            hi = n
        s = 0.0
        for m in range(lo, hi + 1, 2):
            qm = q[m]
            if qm != 0.0:
                fv = f[n - m]
                if fv != 0.0:
                    s += math.exp(lg[n] - lg[m] - lg[n - m] + m * lp + (n - m) * lq) * qm * fv
        g[n] = s
    return g


class WalkProbabilities:
    """Exact ``p_n(x)``, n = 0..N, by sequential coordinate convolution.

    Adding coordinates one at a time: with j coordinates, each step moves
    the newest coordinate with probability 1/j.
    """

    def __init__(self, d: int, N: int):
        if d < 1 or N < 0:
            raise ValueError("need d >= 1 and N >= 0")
        self.d, self.N = d, N
        self.lg = _lgam(N + 1)
        self._memo: dict = {}

    def __call__(self, x) -> np.ndarray:
        c = tuple(sorted(abs(int(v)) for v in x))
        if len(c) != self.d:
            raise ValueError(f"point has dimension {len(c)}, expected {self.d}")
        return self._prefix(c)

    def _prefix(self, c: tuple) -> np.ndarray:
        if c in self._memo:
            return self._memo[c]
        q = _one_dim(c[-1], self.N, self.lg)
        if len(c) == 1:
            out = q
        else:
            out = _combine(self._prefix(c[:-1]), q, len(c), c[-1] % 2, self.lg)
        self._memo[c] = out
        return out


def green_truncated(x, T: int) -> float:
    """``G_T(x) = sum_{n=0}^T p_n(x)`` exactly (floating point)."""
    x = np.asarray(x, dtype=np.int64).ravel()
    if T < 0:
        raise ValueError("T >= 0 required")
    if np.abs(x).sum() > T:
        return 0.0
    return float(WalkProbabilities(x.size, int(T))(x).sum())


def gaussian_tail(x, M: int) -> float:
    """``sum_{n > M, n = |x|_1 mod 2} 2 (d / (2 pi n))^{d/2} exp(-d |x|^2 / (2n))``.

    The local limit approximation of ``sum_{n > M} p_n(x)``.  Summed
    directly for 10^5 terms, then Euler-Maclaurin with the integral in
    closed form through the incomplete gamma function.
    """
    x = np.asarray(x, dtype=np.int64).ravel()
    d = x.size
    a = d * float(x @ x) / 2.0
    c = 2.0 * (d / (2.0 * math.pi)) ** (d / 2)
    par = int(np.abs(x).sum()) % 2
    n0 = M + 1 if (M + 1) % 2 == par else M + 2
    n = np.arange(n0, n0 + 200000, 2, dtype=np.float64)
    s = float((c * n ** (-d / 2) * np.exp(-a / n)).sum())
    K = n0 + 200000.0
    sh = d / 2 - 1
    if a > 0:
        integral = c * a ** (-sh) * special.gamma(sh) * special.gammainc(sh, a / K)
    else:
        integral = c * K ** (-sh) / sh
    fK = c * K ** (-d / 2) * math.exp(-a / K)
    dfK = fK * (a / K**2 - d / (2 * K))
    # step-2 Euler-Maclaurin: sum_{k>=0} f(K + 2k) = I/2 + f(K)/2 - (2/12) f'(K) + ...
    return s + integral / 2 + fK / 2 - dfK / 6


def green_dp(x, N: int = 16000, wp: WalkProbabilities | None = None, levels: int = 4):
    """Independent estimate of G(x): partial sums, local-limit tail, extrapolation.

    ``S(M) = sum_{n <= M} p_n(x) + gaussian_tail(x, M)`` differs from G by
    ``O(M^{-d/2})``; we eliminate ``levels - 1`` powers ``M^{-(d/2 + k)}``
    using ``M = N / 2^j``.  Returns ``(estimate, error_estimate)``.
    """
    x = np.asarray(x, dtype=np.int64).ravel()
    d = x.size
    if d < 3:
        raise ValueError("G is finite only for d >= 3")
    if levels < 2:
        raise ValueError("levels >= 2 required")
    wp = wp or WalkProbabilities(d, N)
    if wp.N < N:
        raise ValueError(f"probabilities only computed to n={wp.N}")
    cs = np.cumsum(wp(x))
    Ms = [N // 2**j for j in range(levels)][::-1]
    S = np.array([cs[M] + gaussian_tail(x, M) for M in Ms])
    table = [S]
    for k in range(levels - 1):
        f = 2.0 ** (d / 2 + k)
        prev = table[-1]
        table.append((f * prev[1:] - prev[:-1]) / (f - 1))
    est = table[-1][-1]
    err = abs(table[-1][-1] - table[-2][-1])
    return float(est), float(err)


def return_probability_dp(d: int, N: int = 16000, levels: int = 4):
    """P(walk ever returns to 0) = 1 - 1/G(0), with G(0) from :func:`green_dp`."""
    g, err = green_dp(np.zeros(d, dtype=np.int64), N, levels=levels)
    return 1.0 - 1.0 / g, err / g**2


# ---------------------------------------------------------------------------
# canonical-state DP over all points reachable in T steps


def _canonical_states(d: int, T: int) -> np.ndarray:
    """All nondecreasing nonnegative d-tuples with sum <= T."""
    rows = [()]
    for _ in range(d):
        rows = [r + (v,) for r in rows for v in range(r[-1] if r else 0, T + 1) if sum(r) + v <= T]
    # enforce the final-sum bound precisely
    arr = np.array(rows, dtype=np.int64).reshape(-1, d)
    return arr[arr.sum(axis=1) <= T]


@dataclass
class TruncatedGreenTable:
    """``p_m`` for m <= T over every canonical point with ``|x|_1 <= T``."""

    d: int
    T: int
    states: np.ndarray
    ranks: np.ndarray
    probs: np.ndarray  # (T+1, nstates)
    method: str = "dynamic-programming"

    @classmethod
    def build(cls, d: int, T: int, max_cells: float = 6e7) -> "TruncatedGreenTable":
        T = int(T)
        if T < 0:
            raise ValueError("T >= 0 required")
        est = math.comb(T + d, d) / math.factorial(d) * (T + 1)
        if est > max_cells * 20:
            raise DPTooLarge(f"T={T} too large for the canonical DP in d={d}; use Monte Carlo")
        states = _canonical_states(d, T)
        if states.shape[0] * (T + 1) > max_cells:
            raise DPTooLarge(f"T={T} needs {states.shape[0]} states; use Monte Carlo")
        binom = _binom_table(d, T + d + 2)
        ranks = _ranks(states, binom)
        order = np.argsort(ranks)
        states, ranks = states[order], ranks[order]
        nb = []
        for i in range(d):
            for s in (1, -1):
                nxt = states.copy()
                nxt[:, i] = np.abs(nxt[:, i] + s)
                nxt.sort(axis=1)
                ok = nxt.sum(axis=1) <= T
                idx = np.full(states.shape[0], states.shape[0], dtype=np.int64)
                idx[ok] = np.searchsorted(ranks, _ranks(nxt[ok], binom))
                nb.append(idx)
        nb = np.stack(nb, axis=1)
        probs = _pull_dp(nb, states.shape[0], T, ranks.size and int(np.flatnonzero(ranks == 0)[0]))
        return cls(d, T, states, ranks, probs)

    def index(self, points) -> np.ndarray:
        """State index per point, or -1 when ``|x|_1 > T``."""
        canon = canonicalize(points)
        out = np.full(canon.shape[0], -1, dtype=np.int64)
        ok = canon.sum(axis=1) <= self.T
        if ok.any():
            binom = _binom_table(self.d, self.T + self.d + 2)
            out[ok] = np.searchsorted(self.ranks, _ranks(canon[ok], binom))
        return out

    def p(self, points, m: int) -> np.ndarray:
        idx = self.index(points)
        out = np.zeros(idx.size)
        ok = idx >= 0
        out[ok] = self.probs[m, idx[ok]]
        return out

    def G_T(self, points, T: int | None = None) -> np.ndarray:
        T = self.T if T is None else T
        idx = self.index(points)
        cum = self.probs[: T + 1].sum(axis=0)
        out = np.zeros(idx.size)
        ok = idx >= 0
        out[ok] = cum[idx[ok]]
        return out


@numba.njit(cache=True)
def _pull_dp(nb, ns, T, origin):
    P = np.zeros((T + 1, ns + 1))
    P[0, origin] = 1.0
    k = nb.shape[1]
    for m in range(T):
        for s in range(ns):
            acc = 0.0
            for e in range(k):
                acc += P[m, nb[s, e]]
            P[m + 1, s] = acc / k
    return P[:, :ns]


# ---------------------------------------------------------------------------
# phi_T


class PhiTable:
    """``phi_T(x) = (1/T) sum_k E[G(x - S_k)]``.

    Uses ``E[G(x - S_k)] = G(x) - G_{k-1}(x)``, so

        T phi_T(x) = (T+1) G(x) - sum_{m<T} (T - m) p_m(x)

    for the k = 0..T convention; ``include_k0=False`` drops the k = 0 term
    (``G(x)/T``).  For ``|x|_1 >= T`` the correction vanishes.
    """

    def __init__(self, d: int, T: int, cache: GreenCache | None = None, include_k0: bool = True):
        if T < 1:
            raise ValueError("T >= 1 required")
        self.d, self.T, self.include_k0 = d, int(T), include_k0
        self.cache = cache or default_cache(d)
        self.table = TruncatedGreenTable.build(d, max(self.T - 1, 0))
        w = (self.T - np.arange(self.T))[:, None]
        self.corr = (w * self.table.probs[: self.T]).sum(axis=0)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
        g = self.cache.values(pts)
        idx = self.table.index(pts)
        corr = np.zeros(len(pts))
        ok = idx >= 0
        corr[ok] = self.corr[idx[ok]]
        k0 = 1.0 if self.include_k0 else 0.0
        return ((self.T + k0) * g - corr) / self.T

    def scalar(self, x) -> float:
        return float(self(np.asarray(x).reshape(1, -1))[0])


def phi_T(x, T: int, cache: GreenCache | None = None, include_k0: bool = True) -> float:
    x = np.asarray(x, dtype=np.int64).ravel()
    return PhiTable(x.size, T, cache, include_k0).scalar(x)


def phi_T_convolution(x, T: int, cache: GreenCache, include_k0: bool = True) -> float:
    """Oracle: ``(1/T) sum_y G_T(y) G(x - y)`` by direct summation."""
    x = np.asarray(x, dtype=np.int64).ravel()
    d = x.size
    tab = TruncatedGreenTable.build(d, T)
    r = np.arange(-T, T + 1)
    grid = np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)
    grid = grid[np.abs(grid).sum(axis=1) <= T]
    gt = tab.G_T(grid)
    if not include_k0:
        gt = gt - np.all(grid == 0, axis=1)
    return float(np.dot(gt, cache.values(x[None, :] - grid)) / T)


# ---------------------------------------------------------------------------
# bounds with fitted constants


# c, C with c/(|x|^{d-2}+1) <= G(x) <= C/(|x|^{d-2}+1); fitted on |x| <= 50
# by scripts/calibrate_constants.py (5% margin) and frozen here
GREEN_BOUNDS = {3: (0.4626, 1.592), 5: (0.1067, 1.214), 7: (0.05541, 1.149)}
# C_2 in phi_T(x) <= C_2 min(1/(1+|x|^{d-2}), 1/(T(1+|x|^{d-4}))), fitted on
# T in {2, 3, 4, 6, 8, 12, 16}
PHI_C2 = {5: 1.837, 7: 1.429}


def canonical_ball(d: int, radius: float) -> np.ndarray:
    """Canonical points (sorted nonnegative coordinates) with norm <= radius.

    Every lattice point of the ball is a signed permutation of one of these.
    """
    R = int(radius)
    rows = [()]
    for _ in range(d):
        rows = [r + (v,) for r in rows for v in range(r[-1] if r else 0, R + 1) if sum(t * t for t in r) + v * v <= radius**2]
    return np.array(rows, dtype=np.int64).reshape(-1, d)


def green_bound_ratio(points, values) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = pts.shape[1]
    r = np.sqrt((pts**2).sum(axis=1))
    return np.asarray(values) * (r ** (d - 2) + 1)


def phi_bound(points, T: int) -> np.ndarray:
    """``min(1/(1+|x|^{d-2}), 1/(T(1+|x|^{d-4})))``."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = pts.shape[1]
    r = np.sqrt((pts**2).sum(axis=1))
    return np.minimum(1 / (1 + r ** (d - 2)), 1 / (T * (1 + r ** (d - 4))))
