"""Deviation experiments: confinement, deviation frequencies, polymer weights
and the maximal capacity of nearest-neighbour paths.

Confinement is in the box ``Q(L) = Q(0, L)``.  The killed kernel of the
walk on a box is the average of one-dimensional killed kernels, so its
principal eigenvalue is ``cos(pi / (L + 1))`` with eigenfunction
``prod_i sin(pi (x_i - lo + 1) / (L + 1))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import linalg

from .capacity import capacity
from .green import GreenCache, default_cache
from .lattice import Walk, cube_bounds, make_rng, range_of, simulate_walk, steps_to_walk

# ---------------------------------------------------------------------------
# strategy plan


@dataclass
class StrategyPlan:
    d: int
    n: int
    zeta: float
    tau: int | None
    R: int | None
    status: str = "ok"

    @property
    def predictedExponent(self):
        """``(tau, R^2, tau / R^2)``; the cost is exp(-c tau / R^2)."""
        if self.tau is None:
            return None
        return (self.tau, self.R**2, self.tau / self.R**2)

    @property
    def balance(self) -> float | None:
        """``tau^2 / R^{d-2}``, comparable to zeta."""
        if self.tau is None:
            return None
        return self.tau**2 / self.R ** (self.d - 2)


def plan_strategy(d: int, n: int, zeta: float) -> StrategyPlan:
    """Confinement time and box size reaching a capacity deficit of order zeta."""
    if n < 1 or zeta <= 0:
        raise ValueError("need n >= 1 and zeta > 0")
    if d == 6:
        return StrategyPlan(d, n, zeta, None, None, "unknown strategy")
    if d == 5:
        return StrategyPlan(d, n, zeta, n, math.ceil((n * n / zeta) ** (1 / 3) - 1e-12))
    if d >= 7:
        return StrategyPlan(d, n, zeta, min(n, math.ceil(zeta - 1e-12)), math.ceil(zeta ** (1 / (d - 2)) - 1e-12))
    raise ValueError("strategies are defined for d = 5 and d >= 7")


# ---------------------------------------------------------------------------
# box survival


def box_survival_rate(L: int, d: int = 5) -> float:
    """Principal Dirichlet eigenvalue ``cos(pi/(L+1))`` of the walk killed off Q(L)."""
    if L < 1:
        raise ValueError("L >= 1 required")
    if L == 1:
        return 0.0
    return math.cos(math.pi / (L + 1))


def _killed_apply(v: np.ndarray) -> np.ndarray:
    """One step of the killed kernel on a d-dimensional box array."""
    d = v.ndim
    out = np.zeros_like(v)
    for ax in range(d):
        sl_lo = [slice(None)] * d
        sl_hi = [slice(None)] * d
        sl_lo[ax] = slice(0, -1)
        sl_hi[ax] = slice(1, None)
        out[tuple(sl_lo)] += v[tuple(sl_hi)]
        out[tuple(sl_hi)] += v[tuple(sl_lo)]
    return out / (2 * d)


def box_survival_power(L: int, d: int = 5, tol: float = 1e-13, max_iter: int = 100000) -> float:
    """Oracle: Rayleigh quotient of power iteration on the lazy killed kernel.

    The lazy kernel ``(I + K)/2`` avoids the ``-lambda`` eigenvalue of the
    bipartite walk; its top eigenvalue is ``(1 + lambda)/2``.
    """
    v = np.ones((L,) * d)
    v /= np.linalg.norm(v)
    mu_old = 0.0
    for _ in range(max_iter):
        w = 0.5 * (v + _killed_apply(v))
        mu = float((v * w).sum())
        v = w / np.linalg.norm(w)
        if abs(mu - mu_old) < tol:
            break
        mu_old = mu
    return 2 * mu - 1


def survival_dp(n: int, L: int, d: int = 5) -> np.ndarray:
    """Exact ``P_0(S_1..S_m in Q(L))`` for m = 0..n by transfer DP."""
    lo, _ = cube_bounds(np.zeros(d, dtype=np.int64), L)
    v = np.ones((L,) * d)
    origin = tuple((-lo).tolist())
    out = np.empty(n + 1)
    out[0] = 1.0
    for m in range(1, n + 1):
        v = _killed_apply(v)
        out[m] = v[origin]
    return out


@numba.njit(cache=True)
def _rejection_lifetimes(n, L, d, trials, seed):
    """Number of steps survived in Q(L) (capped at n) for each trial."""
    np.random.seed(seed)
    lo = -(L // 2)
    hi = lo + L - 1
    out = np.empty(trials, dtype=np.int64)
    x = np.zeros(d, dtype=np.int64)
    for t in range(trials):
        for i in range(d):
            x[i] = 0
        life = n
        for m in range(1, n + 1):
            c = np.random.randint(0, 2 * d)
            a = c // 2
            x[a] += 1 - 2 * (c % 2)
            if x[a] < lo or x[a] > hi:
                life = m - 1
                break
        out[t] = life
    return out


@numba.njit(cache=True)
def _rejection_one(n, L, d, max_trials, seed):
    np.random.seed(seed)
    lo = -(L // 2)
    hi = lo + L - 1
    pos = np.zeros((n + 1, d), dtype=np.int64)
    for t in range(max_trials):
        ok = True
        for m in range(1, n + 1):
            for i in range(d):
                pos[m, i] = pos[m - 1, i]
            c = np.random.randint(0, 2 * d)
            a = c // 2
            pos[m, a] += 1 - 2 * (c % 2)
            if pos[m, a] < lo or pos[m, a] > hi:
                ok = False
                break
        if ok:
            return pos, t + 1
    return pos[:0], max_trials


@numba.njit(cache=True)
def _tilted(n, L, d, seed, start):
    """Walk driven by the principal-eigenfunction h-transform of the killed kernel."""
    np.random.seed(seed)
    lo = -(L // 2)
    s = np.empty(L + 2)
    for j in range(L + 2):
        s[j] = math.sin(math.pi * j / (L + 1))  # j = x - lo + 1, zero at both walls
    pos = np.zeros((n + 1, d), dtype=np.int64)
    for i in range(d):
        pos[0, i] = start[i]
    w = np.empty(2 * d)
    for m in range(1, n + 1):
        tot = 0.0
        for c in range(2 * d):
            a = c // 2
            j = pos[m - 1, a] - lo + 1 + 1 - 2 * (c % 2)
            # ratio h(y)/h(x) only involves the moved coordinate
            w[c] = s[j] / s[pos[m - 1, a] - lo + 1]
            tot += w[c]
        u = np.random.random() * tot
        c = 0
        acc = w[0]
        while acc < u and c < 2 * d - 1:
            c += 1
            acc += w[c]
        for i in range(d):
            pos[m, i] = pos[m - 1, i]
        pos[m, c // 2] += 1 - 2 * (c % 2)
    return pos


def _nseed(seed: int, task: int) -> int:
    return int(make_rng(seed, task).integers(0, 2**31 - 1))


@dataclass
class ConfineResult:
    walk: Walk | None
    trials: int
    method: str
    approximate: bool

    @property
    def accepted(self) -> bool:
        return self.walk is not None


def confine_sample(n: int, L: int, seed: int, d: int = 5, task: int = 0, method: str = "auto", max_trials: int = 10**7) -> ConfineResult:
    """A walk of n steps staying in Q(L).

    ``rejection`` has the exact conditioned law; ``tilt`` follows the
    principal-eigenfunction h-transform (approximate law, flagged);
    ``auto`` uses rejection when the survival probability allows it within
    ``max_trials``.
    """
    if L < 2 and n > 0:
        raise ValueError("no nearest-neighbour walk stays in Q(1)")
    if method == "auto":
        surv = survival_dp(n, L, d)[-1] if L**d <= 2_000_000 else box_survival_rate(L) ** n
        method = "rejection" if surv * max_trials >= 20 else "tilt"
    s = _nseed(seed, task)
    if method == "rejection":
        pos, trials = _rejection_one(n, L, d, max_trials, s)
        if pos.shape[0] == 0:
            return ConfineResult(None, trials, method, False)
        return ConfineResult(Walk(pos, seed), trials, method, False)
    if method == "tilt":
        pos = _tilted(n, L, d, s, np.zeros(d, dtype=np.int64))
        return ConfineResult(Walk(pos, seed), 1, method, True)
    raise ValueError(f"unknown method {method!r}")


def confined_walk(n: int, tau: int, L: int, seed: int, d: int, task: int = 0, method: str = "auto", max_trials: int = 10**7) -> ConfineResult:
    """Confined for the first tau steps, then free up to time n."""
    head = confine_sample(tau, L, seed, d, task, method, max_trials)
    if not head.accepted:
        return head
    tail = simulate_walk(n - tau, seed, d, task=2**32 + task)
    pos = np.vstack([head.walk.positions, head.walk.positions[-1] + tail.positions[1:]])
    return ConfineResult(Walk(pos, seed), head.trials, head.method, head.approximate)


@dataclass
class RejectionStats:
    trials: int
    survivors: np.ndarray  # number of trials alive at each m = 0..n

    @property
    def rate(self) -> float:
        return self.survivors[-1] / self.trials

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    def per_step(self, m0: int | None = None) -> float:
        """Survival per step from the decay between ``m0`` and n."""
        n = len(self.survivors) - 1
        m0 = n // 2 if m0 is None else m0
        return (self.survivors[-1] / self.survivors[m0]) ** (1 / (n - m0))


def rejection_stats(n: int, L: int, d: int, trials: int, seed: int = 0, task: int = 0) -> RejectionStats:
    life = _rejection_lifetimes(n, L, d, trials, _nseed(seed, task))
    hist = np.bincount(life, minlength=n + 1)
    alive = trials - np.concatenate([[0], np.cumsum(hist)[:-1]])
    return RejectionStats(trials, alive)


# ---------------------------------------------------------------------------
# capacity samples, deviation frequency and polymer weights


def range_capacities(n: int, d: int, seeds: range | list, base_seed: int = 0, cache: GreenCache | None = None) -> np.ndarray:
    cache = cache or default_cache(d)
    return np.array([capacity(range_of(simulate_walk(n, base_seed, d, task=int(s))), cache) for s in seeds])


def wilson_interval(k: int, m: int, z: float = 1.96) -> tuple[float, float]:
    if m == 0:
        return 0.0, 1.0
    p = k / m
    den = 1 + z * z / m
    mid = (p + z * z / (2 * m)) / den
    half = z * math.sqrt(p * (1 - p) / m + z * z / (4 * m * m)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass
class DeviationEstimate:
    estimate: float
    stderr: float
    lower: float
    upper: float
    events: int
    samples: int
    mean: float
    oneSided: bool = False


def deviation_prob_mc(n: int, zeta: float, samples: int, d: int = 5, seed: int = 0, mean_samples: int | None = None, cache: GreenCache | None = None) -> DeviationEstimate:
    """Naive frequency of ``Cap(R_n) - E Cap(R_n) <= -zeta``.

    The mean is estimated on an independent block of seeds (tasks
    ``samples..``); zero observed events give a one-sided upper bound.
    """
    if zeta > n + 1:
        return DeviationEstimate(0.0, 0.0, 0.0, 0.0, 0, 0, float("nan"))
    ms = mean_samples or samples
    mean = float(range_capacities(n, d, range(samples, samples + ms), seed, cache).mean())
    caps = range_capacities(n, d, range(samples), seed, cache)
    k = int((caps - mean <= -zeta).sum())
    lo, hi = wilson_interval(k, samples)
    p = k / samples
    return DeviationEstimate(p, math.sqrt(p * (1 - p) / samples), lo, hi, k, samples, mean, k == 0)


@dataclass
class PolymerEstimate:
    u: float
    estimate: float
    stderr: float


def polymer_weights(caps: np.ndarray, mean: float, u: float, n: int, d: int) -> np.ndarray:
    return np.exp(-u * n ** (-2 / (d - 2)) * (caps - mean))


def jackknife_mean_stderr(x: np.ndarray) -> float:
    m = len(x)
    if m < 2:
        return float("nan")
    loo = (x.sum() - x) / (m - 1)
    return float(math.sqrt((m - 1) / m * ((loo - loo.mean()) ** 2).sum()))


def polymer_Z(n: int, us, samples: int, d: int = 7, seed: int = 0, mean_samples: int | None = None, cache: GreenCache | None = None) -> list[PolymerEstimate]:
    """Monte Carlo ``Z_n(u) = E exp(-u n^{-2/(d-2)} (Cap(R_n) - E Cap(R_n)))``."""
    us = [float(u) for u in np.atleast_1d(us)]
    if any(u < 0 for u in us):
        raise ValueError("u >= 0 required")
    ms = mean_samples or samples
    mean = float(range_capacities(n, d, range(samples, samples + ms), seed, cache).mean())
    caps = range_capacities(n, d, range(samples), seed, cache)
    out = []
    for u in us:
        if u == 0.0:
            out.append(PolymerEstimate(0.0, 1.0, 0.0))
            continue
        w = polymer_weights(caps, mean, u, n, d)
        out.append(PolymerEstimate(u, float(w.mean()), jackknife_mean_stderr(w)))
    return out


# ---------------------------------------------------------------------------
# maximal capacity over nearest-neighbour paths

EXHAUSTIVE_CAP = {5: 8}


def _batch_caps(paths: np.ndarray, cache: GreenCache) -> np.ndarray:
    """Capacities of the point sets of a batch of paths ``(B, m, d)``.

    Repeated points are masked to identity rows so one batched Cholesky
    handles every path.
    """
    B, m, d = paths.shape
    diff = paths[:, :, None, :] - paths[:, None, :, :]
    G = cache.values(diff.reshape(-1, d)).reshape(B, m, m)
    same = np.all(diff == 0, axis=-1)
    # duplicate = equal to an earlier point
    dup = np.triu(same, 1).any(axis=1)
    keep = ~dup
    mask = keep[:, :, None] & keep[:, None, :]
    eye = np.broadcast_to(np.eye(m, dtype=bool), mask.shape)
    G = np.where(mask, G, np.where(eye, 1.0, 0.0))
    L = np.linalg.cholesky(G)
    rhs = keep.astype(np.float64)[..., None]
    y = np.linalg.solve(L, rhs)[..., 0]
    return (y * y * keep).sum(axis=1)


def canonical_steps(steps) -> tuple:
    """Representative of the hyperoctahedral orbit of a step sequence.

    Axes are relabelled by first use and each axis gets sign ``+`` at its
    first use; this is the lexicographic minimum of the orbit.
    """
    axis_map, sign_map, out = {}, {}, []
    for c in steps:
        a, s = c // 2, c % 2
        if a not in axis_map:
            axis_map[a] = len(axis_map)
            sign_map[a] = s
        out.append(2 * axis_map[a] + (s ^ sign_map[a]))
    return tuple(out)


def canonical_sequences(n: int, d: int):
    """All canonical step sequences of length n (first step ``+e_1``)."""
    if n == 0:
        yield ()
        return

    def rec(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for a in range(used):
            for s in (0, 1):
                prefix.append(2 * a + s)
                yield from rec(prefix, used)
                prefix.pop()
        if used < d:
            prefix.append(2 * used)
            yield from rec(prefix, used + 1)
            prefix.pop()

    yield from rec([], 0)


@dataclass
class UpwardRecord:
    n: int
    d: int
    cn: float
    method: str
    witness: tuple  # step codes
    examined: int = 0

    def witness_walk(self) -> Walk:
        return steps_to_walk(np.array(self.witness, dtype=np.int64), self.d)


def _best_of(seqs: list, n: int, d: int, cache: GreenCache, batch: int = 4096):
    if n == 0:
        return 1.0 / cache.G0(), ()
    best, arg = -1.0, None
    for i in range(0, len(seqs), batch):
        chunk = np.array(seqs[i : i + batch], dtype=np.int64).reshape(-1, n)
        inc = np.zeros((len(chunk), n + 1, d), dtype=np.int64)
        if n:
            b, t = np.meshgrid(np.arange(len(chunk)), np.arange(1, n + 1), indexing="ij")
            inc[b, t, chunk // 2] = 1 - 2 * (chunk % 2)
        caps = _batch_caps(np.cumsum(inc, axis=1), cache)
        j = int(np.argmax(caps))
        if caps[j] > best:
            best, arg = float(caps[j]), tuple(chunk[j].tolist())
    return best, arg


def cn_exact(n: int, d: int = 5, cache: GreenCache | None = None, cap: int | None = None) -> UpwardRecord:
    """``c_n = max Cap`` over all n-step paths, by search over canonical sequences."""
    limit = cap if cap is not None else EXHAUSTIVE_CAP.get(d, 6)
    if n > limit:
        raise ValueError(f"n={n} above the exhaustive cap {limit}; use cn_beam")
    cache = cache or default_cache(d)
    seqs = list(canonical_sequences(n, d))
    best, arg = _best_of(seqs, n, d, cache)
    return UpwardRecord(n, d, best, "exhaustive", arg, len(seqs))


def cn_bruteforce(n: int, d: int = 5, cache: GreenCache | None = None) -> UpwardRecord:
    """Oracle: every one of the ``(2d)^n`` step sequences, no pruning."""
    cache = cache or default_cache(d)
    seqs = list(itertools.product(range(2 * d), repeat=n))
    best, arg = _best_of(seqs, n, d, cache)
    return UpwardRecord(n, d, best, "bruteforce", arg, len(seqs))


def _double_backtrack(pos: np.ndarray, k: int) -> bool:
    """``gamma(k) == gamma(k-2)`` with k - 2 even."""
    return k >= 2 and (k - 2) % 2 == 0 and bool(np.all(pos[k] == pos[k - 2]))


@dataclass
class _BeamState:
    steps: list
    pos: np.ndarray  # (k+1, d)
    pts: list  # distinct points in first-visit order
    seen: set
    L: np.ndarray
    y: np.ndarray
    cap: float


def cn_beam(n: int, d: int = 5, width: int = 50, prior: bool = True, cache: GreenCache | None = None) -> UpwardRecord:
    """Lower bound on c_n by beam search over canonical step sequences.

    With ``prior`` the paths never double-backtrack at even times.
    """
    if width < 1:
        raise ValueError("width >= 1 required")
    cache = cache or default_cache(d)
    g0 = cache.G0()
    origin = np.zeros((1, d), dtype=np.int64)
    beam = [_BeamState([], origin, [tuple([0] * d)], {tuple([0] * d)}, np.array([[math.sqrt(g0)]]), np.array([1 / math.sqrt(g0)]), 1 / g0)]
    examined = 0
    for k in range(1, n + 1):
        children = {}
        for st in beam:
            used = len(set(c // 2 for c in st.steps))
            for c in range(2 * d):
                a = c // 2
                if a > used or (a == used and c % 2 == 1):
                    continue  # keep sequences canonical
                new = st.pos[-1].copy()
                new[a] += 1 - 2 * (c % 2)
                pos = np.vstack([st.pos, new[None]])
                if prior and _double_backtrack(pos, k):
                    continue
                steps = st.steps + [c]
                key = canonical_steps(steps)
                if key in children:
                    continue
                examined += 1
                p = tuple(new.tolist())
                if p in st.seen:
                    children[key] = _BeamState(steps, pos, st.pts, st.seen, st.L, st.y, st.cap)
                    continue
                g = cache.matrix(np.array(st.pts, dtype=np.int64), new[None])[:, 0]
                w = linalg.solve_triangular(st.L, g, lower=True, check_finite=False)
                s = g0 - w @ w
                if s <= 1e-14:
                    continue
                lnew = math.sqrt(s)
                ynew = (1 - w @ st.y) / lnew
                m = st.L.shape[0]
                L2 = np.zeros((m + 1, m + 1))
                L2[:m, :m] = st.L
                L2[m, :m] = w
                L2[m, m] = lnew
                children[key] = _BeamState(steps, pos, st.pts + [p], st.seen | {p}, L2, np.append(st.y, ynew), st.cap + ynew * ynew)
        beam = sorted(children.values(), key=lambda s: -s.cap)[:width]
    best = beam[0]
    return UpwardRecord(n, d, float(best.cap), f"beam(width={width}, prior={prior})", tuple(best.steps), examined)
