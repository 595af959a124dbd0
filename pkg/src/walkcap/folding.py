"""Multiscale folding detection.

``K_n(r, rho) = {k <= n : l_n(Q(S_k, r)) >= rho r^d}`` collects times whose
r-cube neighbourhood carries a large local time.  A ladder of scales
``(rho_i, r_i, L_i)`` with ``rho_i r_i^{d-2} = C_0 log n`` is disjointified
into sets ``K^_i``:

* d >= 7: ``rho_i = 2^{-i} rho_bar``, ``rho_bar = zeta^{-2/(d-2)}``,
  ``L_i = zeta 2^{2i/(d-2)}``, i = -M..N, and ``K^_i`` removes every
  ``K_j`` with j < i.
* d = 5: ``rho_i = 2^i rho_bar``, ``rho_bar = zeta^{5/3} n^{-7/3}``,
  ``L_i = n 2^{-2i/3}``, i up to N (the first level with ``r_N <= 2``), and
  ``K^_i`` removes every ``K_j`` with j > i.

Real radii are rounded up for the cube side; thresholds keep the real
``rho_i r_i^d``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .capacity import SOLVER_CAP, capacity
from .green import GreenCache, default_cache
from .lattice import OccupancyIndex, Walk, cube_points, cube_side, local_time_bruteforce, local_times_along

log = logging.getLogger(__name__)

DEFAULT_C0 = 2.0


def k_set(walk: Walk, r: float, rho: float) -> np.ndarray:
    """Sorted time indices of ``K_n(r, rho)`` (cube side ``ceil(r)``)."""
    if r < 1 or rho <= 0:
        raise ValueError("need r >= 1 and rho > 0")
    thresh = rho * r**walk.d
    if thresh > walk.n + 1:
        return np.zeros(0, dtype=np.int64)
    lt = local_times_along(walk, cube_side(r))
    return np.flatnonzero(lt >= thresh - 1e-9 * thresh)


def k_set_bruteforce(walk: Walk, r: float, rho: float) -> np.ndarray:
    side = cube_side(r)
    thresh = rho * r**walk.d
    lt = np.array([local_time_bruteforce(walk, walk.positions[k], side) for k in range(walk.n + 1)])
    return np.flatnonzero(lt >= thresh - 1e-9 * thresh)


def rho_typ(d: int, n: int, zeta: float) -> float:
    if d == 5:
        return zeta ** (5 / 3) / n ** (7 / 3)
    if d >= 6:
        return zeta ** (-2 / (d - 2))
    raise ValueError("typical density defined for d = 5 and d >= 7")


def tau_typ(d: int, n: int, zeta: float) -> float:
    return float(n) if d == 5 else float(zeta)


def chi_exponent(d: int) -> float:
    return 5 / 7 if d == 5 else (d - 2) / d


@dataclass(frozen=True)
class Level:
    i: int
    rho: float
    r: float  # exact real radius
    side: int  # integer cube side used for indexing
    L: float
    d: int

    @property
    def threshold(self) -> float:
        """Real local-time threshold ``rho r^d``."""
        return self.rho * self.r**self.d


@dataclass
class ScaleLadder:
    d: int
    n: int
    zeta: float
    C0: float
    rhoBar: float
    levels: list
    M: int  # lowest index is -M (d >= 7) or the lowest populated level (d = 5)
    N: int
    increasing: bool  # densities increase with i (d = 5)

    def level(self, i: int) -> Level:
        for lv in self.levels:
            if lv.i == i:
                return lv
        raise KeyError(i)

    @property
    def indices(self) -> list:
        return [lv.i for lv in self.levels]


def _make_level(i, rho, C0, n, d, L) -> Level:
    r = (C0 * math.log(n) / rho) ** (1 / (d - 2))
    return Level(i, rho, r, cube_side(r), L, d)


def ladder(d: int, n: int, zeta: float, C0: float = DEFAULT_C0, allow_d6: bool = False) -> ScaleLadder:
    """Scale ladder for the folding detector."""
    if n < 2 or zeta <= 0:
        raise ValueError("need n >= 2 and zeta > 0")
    if d == 6 and not allow_d6:
        raise ValueError("no ladder for d=6; pass allow_d6=True to run the d>=7 ladder")
    if d < 5:
        raise ValueError("ladders exist for d = 5 and d >= 7")
    lo_window = n ** chi_exponent(d) * math.log(n)
    if not lo_window <= zeta <= n:
        log.warning("zeta=%.4g outside the window [%.4g, %d]", zeta, lo_window, n)
    rb = rho_typ(d, n, zeta)
    logn = math.log(n)
    levels = []
    if d >= 6:
        N = math.ceil((d - 2) / 2 * math.log2(n / zeta))
        M = math.ceil(math.log2(1 / rb))
        for i in range(-M, N + 1):
            levels.append(_make_level(i, 2.0**-i * rb, C0, n, d, zeta * 2 ** (2 * i / (d - 2))))
        return ScaleLadder(d, n, zeta, C0, rb, levels, M, N, False)
    # d = 5: r_i decreases in i; N is the first level with r_N <= 2
    N = math.ceil(math.log2(C0 * logn / (8 * rb)))
    # lowest level whose threshold C0 log n r_i^2 can still be met by n+1 visits
    i = N
    while True:
        lv = _make_level(i - 1, 2.0 ** (i - 1) * rb, C0, n, d, n * 2 ** (-2 * (i - 1) / 3))
        if lv.threshold > n + 1:
            break
        i -= 1
    for j in range(i, N + 1):
        levels.append(_make_level(j, 2.0**j * rb, C0, n, d, n * 2 ** (-2 * j / 3)))
    return ScaleLadder(d, n, zeta, C0, rb, levels, -i, N, True)


@dataclass
class FoldProfile:
    perLevel: dict  # i -> |K^_i|
    raw: dict  # i -> |K_n(r_i, rho_i)|
    residual: int  # times in no K_i
    kSets: dict | None = None
    vStats: "VStats | None" = None

    def total(self) -> int:
        return sum(self.perLevel.values()) + self.residual


def fold_profile(walk: Walk, lad: ScaleLadder, keep_sets: bool = False) -> FoldProfile:
    """Disjointified level sizes ``|K^_i|``."""
    if walk.n != lad.n or walk.d != lad.d:
        raise ValueError("ladder built for a different walk size or dimension")
    # one local-time pass per distinct cube side
    lt_by_side: dict = {}
    member = {}
    for lv in lad.levels:
        thresh = lv.threshold
        if thresh > walk.n + 1:
            member[lv.i] = np.zeros(walk.n + 1, dtype=bool)
            continue
        if lv.side not in lt_by_side:
            lt_by_side[lv.side] = local_times_along(walk, lv.side)
        member[lv.i] = lt_by_side[lv.side] >= thresh - 1e-9 * thresh
    order = sorted(member, reverse=lad.increasing)
    taken = np.zeros(walk.n + 1, dtype=bool)
    per, raw, sets = {}, {}, {}
    for i in order:
        hat = member[i] & ~taken
        taken |= member[i]
        per[i] = int(hat.sum())
        raw[i] = int(member[i].sum())
        if keep_sets:
            sets[i] = np.flatnonzero(hat)
    return FoldProfile(per, raw, int((~taken).sum()), sets if keep_sets else None)


def event_E(profile: FoldProfile, lad: ScaleLadder, A: float, delta: float, I: int) -> bool:
    """``|K^_i| <= delta L_i`` for ``|i| <= I`` and ``<= A L_i`` elsewhere."""
    for lv in lad.levels:
        bound = delta if abs(lv.i) <= I else A
        if profile.perLevel[lv.i] > bound * lv.L:
            return False
    return True


def detector_fires(profile: FoldProfile, lad: ScaleLadder, delta: float, I: int) -> bool:
    """Some level with ``|i| <= I`` has ``|K^_i| >= delta L_i``."""
    return any(profile.perLevel[lv.i] >= delta * lv.L for lv in lad.levels if abs(lv.i) <= I)


# ---------------------------------------------------------------------------
# Theorem-scale density region V_n


@dataclass
class VStats:
    r: float
    side: int
    localTime: int  # l_n(V_n)
    volume: int  # |V_n|
    cells: int
    cap: float
    ratio: float  # Cap(V_n) / |V_n|^{1 - 2/d}
    empty: bool
    capTooLarge: bool = False


def v_cells(walk: Walk, side: int, threshold: float) -> tuple[list, int]:
    """Aligned cells c (holding ``Q(side c, side)``) with local time >= threshold."""
    idx = OccupancyIndex.build(walk, side)
    cells = [c for c, ks in idx.cells.items() if len(ks) >= threshold - 1e-9 * threshold]
    return cells, sum(len(idx.cells[c]) for c in cells)


def scenario_stats(walk: Walk, zeta: float, beta: float = 1.0, C0: float = DEFAULT_C0, cache: GreenCache | None = None, cap_limit: int = SOLVER_CAP) -> VStats:
    """``l_n(V_n)``, ``|V_n|`` and ``Cap(V_n)`` at ``r_n^{d-2} rho_typ = C0 log n``."""
    d, n = walk.d, walk.n
    rt = rho_typ(d, n, zeta)
    r = (C0 * math.log(n) / rt) ** (1 / (d - 2))
    side = cube_side(r)
    cells, lt = v_cells(walk, side, beta * rt * r**d)
    vol = len(cells) * side**d
    if not cells:
        return VStats(r, side, 0, 0, 0, 0.0, 0.0, True)
    if vol > cap_limit:
        return VStats(r, side, lt, vol, len(cells), float("nan"), float("nan"), False, True)
    pts = np.vstack([cube_points(np.array(c) * side, side) for c in cells])
    cap = capacity(pts, cache or default_cache(d))
    return VStats(r, side, lt, vol, len(cells), cap, cap / vol ** (1 - 2 / d), False)
