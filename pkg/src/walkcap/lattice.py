"""Simple random walks on Z^d, point sets, ranges and cube local times.

Cube convention: ``Q(x, r) = [x - r/2, x + r/2)^d`` (half open).  For an
integer centre the lattice points in one coordinate are
``x - r//2, ..., x - r//2 + r - 1``, so the cube always holds exactly
``r^d`` points.  For odd r it is symmetric around x; for even r it has one
extra layer on the negative side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

COORD_LIMIT = 2**40


def make_rng(seed: int, task: int = 0) -> np.random.Generator:
    """Counter based generator for stream ``task`` of ``seed``."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(task)])
    return np.random.Generator(np.random.Philox(ss))


def as_points(points, d: int | None = None) -> np.ndarray:
    arr = np.asarray(points, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, d or 0)
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"expected {d}-dimensional points, got shape {arr.shape}")
    return arr


def unit(d: int, i: int = 0, sign: int = 1) -> tuple:
    e = [0] * d
    e[i] = sign
    return tuple(e)


def canonical(x) -> tuple:
    """Sorted absolute coordinates: representative of the symmetry class."""
    return tuple(sorted(abs(int(v)) for v in x))


@dataclass(frozen=True)
class Walk:
    """Trajectory ``S_0..S_n`` stored explicitly as an ``(n+1, d)`` array."""

    positions: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        pos = as_points(self.positions)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def __len__(self):
        return self.positions.shape[0]

    def __getitem__(self, k):
        return self.positions[k]

    def is_nearest_neighbor(self) -> bool:
        if self.n == 0:
            return True
        return bool(np.all(np.abs(np.diff(self.positions, axis=0)).sum(axis=1) == 1))


def steps_to_walk(steps: np.ndarray, d: int, seed=None) -> Walk:
    """Step codes ``c`` in ``[0, 2d)`` mean axis ``c // 2`` with sign ``+`` for even c."""
    steps = np.asarray(steps, dtype=np.int64)
    inc = np.zeros((steps.size + 1, d), dtype=np.int64)
    if steps.size:
        inc[np.arange(1, steps.size + 1), steps // 2] = 1 - 2 * (steps % 2)
    return Walk(np.cumsum(inc, axis=0), seed)


def simulate_walk(n: int, seed: int, d: int = 5, task: int = 0) -> Walk:
    """Simple random walk of n steps from the origin.

    A pure function of ``(n, seed, d, task)``: Philox streams are platform
    independent.
    """
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    assert n < COORD_LIMIT
    rng = make_rng(seed, task)
    return steps_to_walk(rng.integers(0, 2 * d, size=n), d, seed)


def straight_walk(n: int, d: int = 5) -> Walk:
    return steps_to_walk(np.zeros(n, dtype=np.int64), d)


def constant_path(n: int, d: int = 5) -> Walk:
    """Degenerate test path held at the origin (not nearest neighbour)."""
    return Walk(np.zeros((n + 1, d), dtype=np.int64))


class PointSet:
    """Finite set of lattice points with O(1) membership and insertion order."""

    def __init__(self, points=(), d: int | None = None):
        pts = as_points(points, d) if len(points) else np.zeros((0, d or 0), dtype=np.int64)
        if d is None:
            d = pts.shape[1]
        self.d = d
        self._index: dict[tuple, int] = {}
        self._order: list[tuple] = []
        for p in pts.tolist():
            self.add(p)

    @classmethod
    def from_array_unique(cls, arr: np.ndarray) -> "PointSet":
        """Build from an array, keeping first occurrences in order."""
        arr = as_points(arr)
        ps = cls(d=arr.shape[1])
        if len(arr):
            _, first = np.unique(arr, axis=0, return_index=True)
            for p in arr[np.sort(first)].tolist():
                t = tuple(p)
                ps._index[t] = len(ps._order)
                ps._order.append(t)
        return ps

    def add(self, p) -> bool:
        t = tuple(int(v) for v in p)
        if len(t) != self.d:
            raise ValueError("dimension mismatch")
        if t in self._index:
            return False
        self._index[t] = len(self._order)
        self._order.append(t)
        return True

    def __contains__(self, p) -> bool:
        return tuple(int(v) for v in p) in self._index

    def __len__(self):
        return len(self._order)

    def __iter__(self):
        return iter(self._order)

    def index(self, p) -> int:
        return self._index[tuple(int(v) for v in p)]

    @property
    def order(self) -> list:
        return list(self._order)

    def array(self) -> np.ndarray:
        if not self._order:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array(self._order, dtype=np.int64)

    @property
    def bbox(self):
        a = self.array()
        if not len(a):
            return None
        return a.min(axis=0), a.max(axis=0)

    def union(self, other: "PointSet") -> "PointSet":
        out = PointSet(d=self.d)
        out._order = list(self._order)
        out._index = dict(self._index)
        for p in other:
            out.add(p)
        return out

    def intersection(self, other: "PointSet") -> "PointSet":
        return PointSet([p for p in self._order if p in other._index], d=self.d)

    def difference(self, other: "PointSet") -> "PointSet":
        return PointSet([p for p in self._order if p not in other._index], d=self.d)

    def translate(self, z) -> "PointSet":
        return PointSet(self.array() + np.asarray(z, dtype=np.int64), d=self.d)

    def issubset(self, other: "PointSet") -> bool:
        return all(p in other._index for p in self._order)

    def __eq__(self, other):
        return isinstance(other, PointSet) and set(self._order) == set(other._order)

    def __repr__(self):
        return f"PointSet(d={self.d}, size={len(self)})"


def range_of(walk: Walk, k: int = 0, l: int | None = None) -> PointSet:
    """Distinct sites visited in ``[k, l]``, ordered by first visit."""
    if l is None:
        l = walk.n
    if not (0 <= k <= l <= walk.n):
        raise IndexError(f"need 0 <= k <= l <= n, got k={k}, l={l}, n={walk.n}")
    return PointSet.from_array_unique(walk.positions[k : l + 1])


def first_visit_times(walk: Walk) -> np.ndarray:
    """Indices k with S_k not in R[0, k-1], in increasing order."""
    _, first = np.unique(walk.positions, axis=0, return_index=True)
    return np.sort(first)


def range_sizes(walk: Walk) -> np.ndarray:
    """``|R[0, k]|`` for every k."""
    new = np.zeros(walk.n + 1, dtype=np.int64)
    new[first_visit_times(walk)] = 1
    return np.cumsum(new)


# ---------------------------------------------------------------------------
# cubes and occupancy


def cube_bounds(center, r: int):
    """Inclusive lattice bounds of ``Q(center, r)`` per coordinate."""
    c = np.asarray(center, dtype=np.int64)
    lo = c - r // 2
    return lo, lo + r - 1


def cube_points(center, r: int) -> np.ndarray:
    lo, _ = cube_bounds(center, r)
    grids = np.meshgrid(*[np.arange(v, v + r) for v in lo], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def cell_of(points: np.ndarray, r: int) -> np.ndarray:
    """Aligned cell ids: cell c holds ``Q(r c, r)``."""
    return (np.asarray(points, dtype=np.int64) + r // 2) // r


@dataclass
class OccupancyIndex:
    """Positions of a walk bucketed into aligned cells of side r."""

    cellSide: int
    cells: dict = field(default_factory=dict)
    total: int = 0
    positions: np.ndarray | None = None

    @classmethod
    def build(cls, walk: Walk, r: int) -> "OccupancyIndex":
        r = int(r)
        if r < 1:
            raise ValueError("cell side must be >= 1")
        pos = walk.positions
        ids = cell_of(pos, r)
        order = np.lexsort(ids.T[::-1])
        sid = ids[order]
        cells = {}
        if len(order):
            brk = np.flatnonzero(np.any(sid[1:] != sid[:-1], axis=1)) + 1
            for chunk in np.split(order, brk):
                cells[tuple(ids[chunk[0]].tolist())] = chunk
        return cls(r, cells, pos.shape[0], pos)

    def cell_count(self, cell) -> int:
        v = self.cells.get(tuple(int(c) for c in cell))
        return 0 if v is None else len(v)


def local_time(index: OccupancyIndex, center, r: int | None = None) -> int:
    """Exact number of k <= n with ``S_k in Q(center, r)``."""
    r = index.cellSide if r is None else int(r)
    if r != index.cellSide:
        raise ValueError("index built for a different cell side")
    lo, hi = cube_bounds(center, r)
    clo = cell_of(lo, r)
    chi = cell_of(hi, r)
    count = 0
    ranges = [range(a, b + 1) for a, b in zip(clo.tolist(), chi.tolist())]
    for cell in itertools.product(*ranges):
        ks = index.cells.get(cell)
        if ks is None:
            continue
        p = index.positions[ks]
        count += int(np.all((p >= lo) & (p <= hi), axis=1).sum())
    return count


def local_time_bruteforce(walk: Walk, center, r: int) -> int:
    lo, hi = cube_bounds(center, r)
    p = walk.positions
    return int(np.all((p >= lo) & (p <= hi), axis=1).sum())


@numba.njit(cache=True)
def _cube_counts(pos, r):
    n1, d = pos.shape
    lo_off = r // 2
    out = np.zeros(n1, dtype=np.int64)
    for k in range(n1):
        j = 0
        cnt = 0
        while j < n1:
            # L-infinity excess outside the cube; a walk needs that many steps
            excess = 0
            for i in range(d):
                lo = pos[k, i] - lo_off
                v = pos[j, i]
                if v < lo:
                    e = lo - v
                elif v > lo + r - 1:
                    e = v - (lo + r - 1)
                else:
                    e = 0
                if e > excess:
                    excess = e
            if excess == 0:
                cnt += 1
                j += 1
            else:
                j += excess
        out[k] = cnt
    return out


@numba.njit(cache=True)
def _cube_counts_general(pos, r):
    n1, d = pos.shape
    lo_off = r // 2
    out = np.zeros(n1, dtype=np.int64)
    for k in range(n1):
        cnt = 0
        for j in range(n1):
            inside = True
            for i in range(d):
                lo = pos[k, i] - lo_off
                v = pos[j, i]
                if v < lo or v > lo + r - 1:
                    inside = False
                    break
            if inside:
                cnt += 1
        out[k] = cnt
    return out


def local_times_along(walk: Walk, r: int) -> np.ndarray:
    """``l_n(Q(S_k, r))`` for every k.

    Uses a skip-ahead scan that is exact for nearest-neighbour paths and a
    plain scan otherwise.
    """
    pos = np.ascontiguousarray(walk.positions)
    if walk.is_nearest_neighbor():
        return _cube_counts(pos, int(r))
    return _cube_counts_general(pos, int(r))


# ---------------------------------------------------------------------------
# file formats


def write_points(path, points, d: int | None = None, header_extra: str | None = None):
    arr = as_points(points, d)
    d = arr.shape[1] if d is None else d
    lines = [f"d={d}"]
    if header_extra:
        lines.append(header_extra)
    lines += [" ".join(str(v) for v in row) for row in arr.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse(path):
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("d="):
        raise ValueError(f"{path}: first line must be d=<dim>")
    d = int(lines[0][2:])
    meta = {}
    body = lines[1:]
    if body and "=" in body[0]:
        for tok in body[0].split():
            key, val = tok.split("=")
            meta[key] = int(val)
        body = body[1:]
    rows = [[int(v) for v in ln.split()] for ln in body]
    arr = np.array(rows, dtype=np.int64).reshape(-1, d)
    return d, meta, arr


def read_points(path) -> PointSet:
    d, _, arr = _parse(path)
    return PointSet(arr, d=d)


def write_walk(path, walk: Walk):
    write_points(path, walk.positions, walk.d, f"seed={walk.seed or 0} n={walk.n}")


def read_walk(path) -> Walk:
    d, meta, arr = _parse(path)
    w = Walk(arr, meta.get("seed"))
    if "n" in meta and meta["n"] != w.n:
        raise ValueError(f"{path}: header n={meta['n']} but {w.n} steps present")
    return w


def cube_side(r: float) -> int:
    """Integer side used for indexing a real radius."""
    return max(1, int(math.ceil(r - 1e-12)))
