"""Cross terms between finite sets and the dyadic decomposition of Cap(R_n).

For finite A, B with equilibrium measures e_A, e_B, e_{A u B}:

* ``chi_C(A, B) = Cap A + Cap B - Cap(A u B)``
* ``chi(A, B) = sum_{x in A, y in B} e_{AuB}(x) G(x - y) e_B(y)``
* ``chiTilde(A, B) = sum_{x in A, y in B} e_A(x) G(x - y) e_B(y)``
* ``chiBar(A, B) = sum_{x in A, y in B} e_A(x) G(x - y)``
* ``Gamma(A, B) = sum_{x in A, y in B} G(y - x) e_B(y)``
* ``chi_0(A, B) = sum_{x in A minus B, y in B} e_{AuB}(x) G(x - y) e_B(y)``
* ``epsilon = chi(A, B) + chi(B, A) - chi_C(A, B)``, in ``[0, Cap(A n B)]``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .capacity import capacity, equilibrium
from .green import GreenCache, default_cache
from .lattice import PointSet, Walk, make_rng, range_of, simulate_walk


def _as_set(A) -> PointSet:
    return A if isinstance(A, PointSet) else PointSet(A)


def _check_pair(A: PointSet, B: PointSet):
    if len(A) == 0 or len(B) == 0:
        raise ValueError("cross terms need nonempty sets")
    if A.d != B.d:
        raise ValueError("sets live in different dimensions")


@dataclass
class CrossTermReport:
    chiC: float
    chiAB: float
    chiBA: float
    chiBar: float
    chiTilde: float
    gammaAB: float
    chiZero: float
    epsilon: float
    capA: float
    capB: float
    capUnion: float
    capIntersection: float

    def to_dict(self) -> dict:
        return asdict(self)

    def violations(self, tol: float = 1e-8) -> list[str]:
        """Invariants that fail by more than ``tol``."""
        out = []
        if abs(self.chiC - (self.capA + self.capB - self.capUnion)) > tol:
            out.append("chiC != capA + capB - capUnion")
        if self.chiC < -tol or self.chiC > min(self.capA, self.capB) + tol:
            out.append("chiC outside [0, min(capA, capB)]")
        if self.epsilon < -tol or self.epsilon > self.capIntersection + tol:
            out.append("epsilon outside [0, Cap(A n B)]")
        if self.chiC > 2 * self.gammaAB + tol:
            out.append("chiC > 2 Gamma(A, B)")
        return out


def chi_C(A, B, cache: GreenCache | None = None) -> float:
    """Capacity defect of the union."""
    A, B = _as_set(A), _as_set(B)
    _check_pair(A, B)
    cache = cache or default_cache(A.d)
    return capacity(A, cache) + capacity(B, cache) - capacity(A.union(B), cache)


def _weights(sol, S: PointSet) -> np.ndarray:
    """Equilibrium measure of ``sol.set`` evaluated on the points of S."""
    return sol.measure_of(S.array())


def chi(A, B, cache: GreenCache | None = None) -> float:
    """``sum_{x in A, y in B} e_{AuB}(x) G(x - y) e_B(y)``."""
    A, B = _as_set(A), _as_set(B)
    _check_pair(A, B)
    cache = cache or default_cache(A.d)
    eU = _weights(equilibrium(A.union(B), cache), A)
    eB = equilibrium(B, cache).eq
    return float(eU @ cache.matrix(A.array(), B.array()) @ eB)


def chi_variants(A, B, cache: GreenCache | None = None) -> CrossTermReport:
    """Every cross-term functional from one solve each of A, B and A u B."""
    A, B = _as_set(A), _as_set(B)
    _check_pair(A, B)
    cache = cache or default_cache(A.d)
    U = A.union(B)
    I = A.intersection(B)
    sA, sB, sU = equilibrium(A, cache), equilibrium(B, cache), equilibrium(U, cache)
    M = cache.matrix(A.array(), B.array())  # G(x - y), x in A, y in B
    eA, eB = sA.eq, sB.eq
    eUA, eUB = _weights(sU, A), _weights(sU, B)
    chiAB = float(eUA @ M @ eB)
    chiBA = float(eA @ M @ eUB)  # G symmetric: sum_{y in B, x in A} e_U(y) G e_A(x)
    chiTilde = float(eA @ M @ eB)
    chiBar = float(eA @ M.sum(axis=1))
    gamma = float((M @ eB).sum())
    notB = np.array([p not in B for p in A.order], dtype=bool)
    chiZero = float((eUA * notB) @ M @ eB)
    chiC = sA.cap + sB.cap - sU.cap
    capI = capacity(I, cache) if len(I) else 0.0
    return CrossTermReport(
        chiC=chiC,
        chiAB=chiAB,
        chiBA=chiBA,
        chiBar=chiBar,
        chiTilde=chiTilde,
        gammaAB=gamma,
        chiZero=chiZero,
        epsilon=chiAB + chiBA - chiC,
        capA=sA.cap,
        capB=sB.cap,
        capUnion=sU.cap,
        capIntersection=capI,
    )


def gamma(A, B, cache: GreenCache | None = None) -> float:
    """``Gamma(A, B) = sum_{x in A} P_x(hit B)`` written through e_B."""
    A, B = _as_set(A), _as_set(B)
    _check_pair(A, B)
    cache = cache or default_cache(A.d)
    return float((cache.matrix(A.array(), B.array()) @ equilibrium(B, cache).eq).sum())


# ---------------------------------------------------------------------------
# dyadic decomposition


def dyadic_times(n: int, level: int) -> np.ndarray:
    """Boundaries ``floor(i n / 2^level)``, i = 0..2^level; nested across levels."""
    return (np.arange(2**level + 1, dtype=np.int64) * n) // 2**level


@dataclass
class DyadicRecord:
    n: int
    L: int
    capRange: float
    capPieces: list  # Cap(R_i^L)
    chiByLevel: list  # per level l = 1..L, list of chi_C of sibling pairs
    pieceLengths: list
    residual: float

    @property
    def reconstructed(self) -> float:
        return float(sum(self.capPieces) - sum(sum(v) for v in self.chiByLevel))


def dyadic_decompose(walk: Walk, L: int, cache: GreenCache | None = None) -> DyadicRecord:
    """Check ``Cap(R_n) = sum_i Cap(R_i^L) - sum_l sum_i chi_C(R^l_{2i-1}, R^l_{2i})``.

    Piece i at level l is ``R[t_{i-1}, t_i]`` with ``t_i = floor(i n / 2^l)``,
    so sibling pieces share their common endpoint.
    """
    n = walk.n
    if L < 0 or 2**L > n:
        raise ValueError(f"need 2^L <= n (L={L}, n={n})")
    cache = cache or default_cache(walk.d)
    caps: dict[tuple, float] = {}

    def cap_of(level, i):
        key = (level, i)
        if key not in caps:
            t = dyadic_times(n, level)
            caps[key] = capacity(range_of(walk, int(t[i]), int(t[i + 1])), cache)
        return caps[key]

    chis = []
    for level in range(1, L + 1):
        row = []
        for i in range(2 ** (level - 1)):
            row.append(cap_of(level, 2 * i) + cap_of(level, 2 * i + 1) - cap_of(level - 1, i))
        chis.append(row)
    pieces = [cap_of(L, i) for i in range(2**L)]
    total = cap_of(0, 0)
    lengths = np.diff(dyadic_times(n, L)).tolist()
    rec = DyadicRecord(n, L, total, pieces, chis, lengths, 0.0)
    rec.residual = abs(total - rec.reconstructed)
    return rec


def gamma_tail_samples(m: int, d: int, seeds: int, base_seed: int = 0, cache: GreenCache | None = None) -> np.ndarray:
    """``Gamma(R~_m, R_m)`` for independent walks of m steps from the origin."""
    cache = cache or default_cache(d)
    out = np.empty(seeds)
    for s in range(seeds):
        a = range_of(simulate_walk(m, base_seed, d, task=2 * s))
        b = range_of(simulate_walk(m, base_seed, d, task=2 * s + 1))
        out[s] = gamma(a, b, cache)
    return out


def random_pair(d: int, size: int, seed: int, task: int = 0, spread: int = 4):
    """Two random overlapping sets with at most ``size`` points each."""
    rng = make_rng(seed, task)
    pts = rng.integers(-spread, spread + 1, size=(3 * size, d))
    A = PointSet.from_array_unique(pts[: rng.integers(1, size + 1)])
    shift = rng.integers(-2, 3, size=d)
    # share a few points so that intersections are exercised
    shared = A.array()[: rng.integers(0, 4)]
    Bpts = np.vstack([shared, pts[size:] + shift])
    B = PointSet.from_array_unique(Bpts)
    B = PointSet(B.array()[: rng.integers(1, size + 1)])
    return A, B
