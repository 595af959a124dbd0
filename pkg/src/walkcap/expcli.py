"""Experiment harness: configuration, seeded parallel runs, persistence, summaries.

Output format (one JSON object per line):

* header  ``{"type": "header", "config": ..., "version": ..., "meta": ...}``
* rows    ``{"type": "row", "task": k, ...}`` in task order
* summary ``{"type": "summary", "fields": {name: stats}}``
* trailer ``{"type": "trailer", "rows": m, "errors": e, "sha256": h}``
  where h hashes the row lines, so a truncated file is detected.

Floats are written with 17 significant digits; non-finite floats as the
strings ``"NaN"``, ``"Infinity"``, ``"-Infinity"``.  Row content depends
only on the config and the code version, never on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("walkcap")

COMMANDS = ("green", "capacity", "crossterm", "corrector", "fold", "confine", "deviate", "polymer", "upward", "selftest")
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4
MEAN_OFFSET = 1 << 30  # task ids of the independent centering block


class UsageError(ValueError):
    pass


class TruncatedOutput(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    command: str
    d: int = 5
    n: int = 100
    zeta: float | None = None
    T: int = 10
    seed: int = 0
    first: int = 0  # first task index of this seed block
    seeds: int = 10
    tol: float = 1e-8
    C0: float = 2.0
    output: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.seeds < 0 or self.first < 0:
            raise UsageError("seeds and first must be nonnegative")
        if self.d < 3:
            raise UsageError("d >= 3 required")
        if self.n < 0:
            raise UsageError("n >= 0 required")

    @property
    def tasks(self) -> range:
        return range(self.first, self.first + self.seeds)

    def get(self, key: str, default=None, kind=str):
        if key not in self.params:
            return default
        v = self.params[key]
        try:
            if kind is bool:
                return str(v).lower() in ("1", "true", "yes", "on")
            if kind is list:
                return [float(t) for t in str(v).split(",") if t.strip()]
            return kind(v)
        except ValueError as e:
            raise UsageError(f"bad value for {key}: {v!r}") from e

    def to_dict(self) -> dict:
        return asdict(self)

    def identity(self) -> dict:
        """Config fields that must agree across seed blocks being pooled."""
        d = self.to_dict()
        for k in ("first", "seeds", "output"):
            d.pop(k)
        return d


_CASTS = {"d": int, "n": int, "T": int, "seed": int, "first": int, "seeds": int, "zeta": float, "tol": float, "C0": float, "output": str}


def parse_kv(lines) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"expected key=value, got {raw.strip()!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def config_from(command: str, values: dict) -> ExperimentConfig:
    kw, params = {}, {}
    for k, v in values.items():
        if k in _CASTS:
            try:
                kw[k] = None if (k == "zeta" and v in ("", "none", "None")) else _CASTS[k](v)
            except ValueError as e:
                raise UsageError(f"bad value for {k}: {v!r}") from e
        elif k == "command":
            continue
        else:
            params[k] = str(v)
    return ExperimentConfig(command, params=params, **kw)


# ---------------------------------------------------------------------------
# serialization


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def dumps(obj) -> str:
    """Compact JSON with floats at 17 significant digits."""

    def enc(x):
        if isinstance(x, dict):
            return "{" + ",".join(json.dumps(k) + ":" + enc(v) for k, v in x.items()) + "}"
        if isinstance(x, list):
            return "[" + ",".join(enc(v) for v in x) + "]"
        if isinstance(x, bool) or x is None:
            return json.dumps(x)
        if isinstance(x, int):
            return str(x)
        if isinstance(x, float):
            if math.isnan(x):
                return '"NaN"'
            if math.isinf(x):
                return '"Infinity"' if x > 0 else '"-Infinity"'
            s = format(x, ".17g")
            return s if any(c in s for c in ".en") else s + ".0"
        return json.dumps(x)

    return enc(_plain(obj))


def _num(v):
    if isinstance(v, bool):
        return float(v)
    if isinstance(v, (int, float)):
        return float(v)
    if v in ("NaN", "Infinity", "-Infinity"):
        return float(v.replace("Infinity", "inf"))
    return None


def numeric_fields(rows: list[dict]) -> dict:
    """Per-field arrays of numeric row values; nested dicts are flattened with dots."""
    cols: dict = {}

    def walk(prefix, obj, k):
        for key, v in obj.items():
            name = f"{prefix}{key}"
            if name in ("type", "task"):
                continue
            if isinstance(v, dict):
                walk(name + ".", v, k)
                continue
            x = _num(v)
            if x is not None:
                cols.setdefault(name, []).append((k, x))

    for k, r in enumerate(rows):
        if "error" not in r:
            walk("", r, k)
    return {name: np.array([x for _, x in vals]) for name, vals in cols.items()}


def field_stats(x: np.ndarray) -> dict:
    x = x[np.isfinite(x)]
    m = len(x)
    if m == 0:
        return {"count": 0}
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if m > 1 else float("nan")
    se = math.sqrt(var / m) if m > 1 else float("nan")
    q = np.quantile(x, [0.05, 0.5, 0.95])
    return {
        "count": m,
        "mean": mean,
        "variance": var,
        "stderr": se,
        "q05": float(q[0]),
        "q50": float(q[1]),
        "q95": float(q[2]),
        "ciLow": mean - 1.96 * se if m > 1 else float("nan"),
        "ciHigh": mean + 1.96 * se if m > 1 else float("nan"),
    }


def summarize_rows(rows: list[dict]) -> dict:
    return {name: field_stats(x) for name, x in numeric_fields(rows).items()}


STAT_COLUMNS = ("count", "mean", "variance", "stderr", "q05", "q50", "q95", "ciLow", "ciHigh")


def write_csv(path, summary: dict):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(("field",) + STAT_COLUMNS)
        for name, st in summary.items():
            w.writerow([name] + [format(st[c], ".17g") if isinstance(st.get(c), float) else st.get(c, "") for c in STAT_COLUMNS])


@dataclass
class ResultRecord:
    header: dict
    rows: list
    summary: dict
    trailer: dict

    @property
    def errors(self) -> int:
        return sum(1 for r in self.rows if "error" in r)


def read_result(path) -> ResultRecord:
    """Parse an output file; raises TruncatedOutput when the trailer is missing or wrong."""
    header, rows, summary, trailer = None, [], None, None
    h = hashlib.sha256()
    with open(path) as f:
        for line in f:
            if not line.endswith("\n"):
                raise TruncatedOutput(f"{path}: last line incomplete")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise TruncatedOutput(f"{path}: unparsable line") from e
            t = obj.get("type")
            if t == "header":
                header = obj
            elif t == "row":
                h.update(line.encode())
                rows.append(obj)
            elif t == "summary":
                summary = obj["fields"]
            elif t == "trailer":
                trailer = obj
    if header is None:
        raise TruncatedOutput(f"{path}: no header")
    if trailer is None:
        raise TruncatedOutput(f"{path}: no trailer after {len(rows)} rows")
    if trailer["rows"] != len(rows) or trailer["sha256"] != h.hexdigest():
        raise TruncatedOutput(f"{path}: row checksum mismatch")
    return ResultRecord(header, rows, summary, trailer)


# ---------------------------------------------------------------------------
# tasks


def _zeta(cfg: ExperimentConfig) -> float:
    return cfg.zeta if cfg.zeta is not None else cfg.n**0.8


def _walk_for(cfg: ExperimentConfig, k: int):
    from .deviation import confined_walk, plan_strategy
    from .lattice import simulate_walk

    if not cfg.get("confined", False, bool):
        return simulate_walk(cfg.n, cfg.seed, cfg.d, task=k), {}
    plan = plan_strategy(cfg.d, cfg.n, _zeta(cfg))
    L = cfg.get("L", plan.R, int)
    tau = cfg.get("tau", plan.tau, int)
    res = confined_walk(cfg.n, tau, L, cfg.seed, cfg.d, task=k, method=cfg.get("method", "auto"), max_trials=cfg.get("budget", 10**7, int))
    if not res.accepted:
        raise RuntimeError(f"confinement budget exhausted after {res.trials} trials")
    return res.walk, {"trials": res.trials, "approximate": res.approximate}


def _task_green(cfg, k):
    from .green import default_cache, green_dp, green_quadrature, harmonicity_residual
    from .lattice import make_rng

    cache = default_cache(cfg.d)
    r = cfg.get("radius", 10, int)
    x = make_rng(cfg.seed, k).integers(-r, r + 1, size=cfg.d)
    row = {"x": x.tolist(), "norm": float(np.linalg.norm(x)), "G": float(cache.values(x[None])[0])}
    row["Gquad"] = float(green_quadrature(x[None], cfg.d)[0])
    row["harmonicity"] = float(abs(harmonicity_residual(x[None], cache)[0]))
    if cfg.get("dp", False, bool):
        val, err = green_dp(x)
        row.update(Gdp=float(val), dpError=float(err), dpDiff=abs(float(val) - row["Gquad"]))
    return row


def _task_capacity(cfg, k):
    from .capacity import capacity, capacity_mc
    from .green import default_cache
    from .lattice import range_of

    walk, extra = _walk_for(cfg, k)
    R = range_of(walk)
    cap = capacity(R, default_cache(cfg.d))
    row = {"cap": cap, "rangeSize": len(R), "capPerStep": cap / max(cfg.n, 1), **extra}
    walks = cfg.get("mc", 0, int)
    if walks:
        pts = R.array()
        diam = float(np.linalg.norm(pts.max(0) - pts.min(0)))
        mc = capacity_mc(R, walks, cfg.get("escape", 4 * max(diam, 1.0), float), cfg.seed, k)
        row.update(capMC=mc.estimate, capMCStderr=mc.stderr, capMCBias=mc.biasBound)
    return row


def _task_crossterm(cfg, k):
    from .crossterms import chi_variants, dyadic_decompose, random_pair
    from .green import default_cache
    from .lattice import simulate_walk

    cache = default_cache(cfg.d)
    mode = cfg.get("mode", "pairs")
    if mode == "pairs":
        A, B = random_pair(cfg.d, cfg.get("size", 64, int), cfg.seed, k)
        rep = chi_variants(A, B, cache)
        row = rep.to_dict()
        row.update(sizeA=len(A), sizeB=len(B), violations=len(rep.violations(cfg.tol)))
        return row
    if mode == "dyadic":
        rec = dyadic_decompose(simulate_walk(cfg.n, cfg.seed, cfg.d, task=k), cfg.get("L", 3, int), cache)
        return {"capRange": rec.capRange, "residual": rec.residual, **{f"chiLevel{l + 1}": float(sum(v)) for l, v in enumerate(rec.chiByLevel)}}
    raise UsageError(f"unknown crossterm mode {mode!r}")


def _task_corrector(cfg, k):
    from .corrector import chi_n, decomposition_gap, xi_n, xi_star_mc
    from .green import default_cache

    cache = default_cache(cfg.d)
    walk, extra = _walk_for(cfg, k)
    xi = xi_n(walk, cfg.T, cache).total
    row = {"xi": xi, "chi": chi_n(walk, cfg.T, cache), "gap": decomposition_gap(walk, cfg.T, cache), **extra}
    inner = cfg.get("inner", 0, int)
    if inner:
        est, se = xi_star_mc(walk, cfg.T, inner, cfg.seed, k, cache)
        row.update(xiStar=est, xiStarStderr=se, lemmaMargin=2 * xi + 3 * se - est)
    return row


def _task_fold(cfg, k):
    from .folding import detector_fires, fold_profile, ladder, scenario_stats
    from .green import default_cache

    walk, extra = _walk_for(cfg, k)
    lad = ladder(cfg.d, cfg.n, _zeta(cfg), cfg.C0, allow_d6=cfg.get("allow_d6", False, bool))
    prof = fold_profile(walk, lad)
    row = {
        "levels": {str(i): v for i, v in prof.perLevel.items()},
        "raw": {str(i): v for i, v in prof.raw.items()},
        "residual": prof.residual,
        "fires": detector_fires(prof, lad, cfg.get("delta", 0.05, float), cfg.get("I", 2, int)),
        **extra,
    }
    if cfg.get("scenario", False, bool):
        st = scenario_stats(walk, _zeta(cfg), cfg.get("beta", 1.0, float), cfg.C0, default_cache(cfg.d), cfg.get("cap_limit", 8192, int))
        row.update(vLocalTime=st.localTime, vVolume=st.volume, vCap=st.cap, vRatio=st.ratio, vEmpty=st.empty, vCapTooLarge=st.capTooLarge)
    return row


def _task_confine(cfg, k):
    from .capacity import capacity
    from .deviation import confine_sample, plan_strategy
    from .green import default_cache
    from .lattice import range_of

    L = cfg.get("L", None, int) or plan_strategy(cfg.d, cfg.n, _zeta(cfg)).R
    res = confine_sample(cfg.n, L, cfg.seed, cfg.d, k, cfg.get("method", "auto"), cfg.get("budget", 10**7, int))
    row = {"L": L, "accepted": res.accepted, "trials": res.trials, "method": res.method, "approximate": res.approximate}
    if res.accepted:
        R = range_of(res.walk)
        row.update(cap=capacity(R, default_cache(cfg.d)), rangeSize=len(R))
    return row


def _cap_of_walk(cfg, k):
    from .capacity import capacity
    from .green import default_cache
    from .lattice import range_of, simulate_walk

    return capacity(range_of(simulate_walk(cfg.n, cfg.seed, cfg.d, task=k)), default_cache(cfg.d))


def _task_deviate(cfg, k, mean):
    cap = _cap_of_walk(cfg, k)
    return {"cap": cap, "centered": cap - mean, "event": bool(cap - mean <= -_zeta(cfg))}


def _task_polymer(cfg, k, mean):
    from .deviation import polymer_weights

    cap = _cap_of_walk(cfg, k)
    us = cfg.get("u", [0.5, 1.0, 2.0], list)
    return {"cap": cap, "w": {format(u, "g"): float(polymer_weights(np.array([cap]), mean, u, cfg.n, cfg.d)[0]) for u in us}}


def _task_upward(cfg, k):
    from .deviation import EXHAUSTIVE_CAP, cn_beam, cn_exact

    n = k  # task index is the path length
    row = {"n": n}
    if n <= cfg.get("exhaustive_cap", EXHAUSTIVE_CAP.get(cfg.d, 6), int):
        ex = cn_exact(n, cfg.d, cap=cfg.get("exhaustive_cap", None, int))
        row.update(cnExact=ex.cn, witnessExact="".join(map(str, ex.witness)))
    bm = cn_beam(n, cfg.d, cfg.get("width", 50, int), cfg.get("prior", True, bool))
    row.update(cnBeam=bm.cn, cnBeamPerStep=bm.cn / max(n, 1), witnessBeam="".join(map(str, bm.witness)))
    return row


_TASKS = {
    "green": _task_green,
    "capacity": _task_capacity,
    "crossterm": _task_crossterm,
    "corrector": _task_corrector,
    "fold": _task_fold,
    "confine": _task_confine,
    "deviate": _task_deviate,
    "polymer": _task_polymer,
    "upward": _task_upward,
}


def _run_task(args):
    cfg, k, extra = args
    try:
        fn = _TASKS[cfg.command]
        row = fn(cfg, k, *extra)
    except UsageError:
        raise
    except Exception as e:  # per-row error entry, the run continues
        return {"type": "row", "task": k, "error": f"{type(e).__name__}: {e}"}
    return {"type": "row", "task": k, **row}


def _run_mean(args):
    cfg, k = args
    return _cap_of_walk(cfg, MEAN_OFFSET + k)


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        yield from map(fn, items)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(fn, items, chunksize=1)


def _meta(cfg: ExperimentConfig, workers: int) -> tuple[dict, tuple]:
    """Run-level values shared by every row (e.g. the centering mean)."""
    meta: dict = {}
    if cfg.command in ("deviate", "polymer"):
        ms = cfg.get("mean_seeds", max(cfg.seeds, 1), int)
        caps = np.array(list(_map(_run_mean, [(cfg, k) for k in range(cfg.first, cfg.first + ms)], workers)))
        meta.update(mean=float(caps.mean()), meanSeeds=ms, meanStderr=float(caps.std(ddof=1) / math.sqrt(ms)) if ms > 1 else float("nan"))
        return meta, (meta["mean"],)
    if cfg.command == "confine":
        from .deviation import box_survival_rate, plan_strategy, survival_dp

        L = cfg.get("L", None, int) or plan_strategy(cfg.d, cfg.n, _zeta(cfg)).R
        meta["rate"] = box_survival_rate(L, cfg.d)
        if L**cfg.d <= 2_000_000:
            meta["survivalDP"] = float(survival_dp(cfg.n, L, cfg.d)[-1])
    if cfg.command == "fold":
        from .folding import ladder

        lad = ladder(cfg.d, cfg.n, _zeta(cfg), cfg.C0, allow_d6=cfg.get("allow_d6", False, bool))
        meta["levels"] = [{"i": lv.i, "rho": lv.rho, "r": lv.r, "side": lv.side, "L": lv.L, "threshold": lv.threshold} for lv in lad.levels]
    return meta, ()


def run(cfg: ExperimentConfig, workers: int = 1, stream=None) -> ResultRecord:
    """Run every task of the seed block, writing rows as they finish (in task order)."""
    if cfg.command == "selftest":
        raise UsageError("selftest is not a row experiment")
    meta, extra = _meta(cfg, workers)
    header = {"type": "header", "config": cfg.to_dict(), "version": __version__, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"), "meta": meta}
    out = stream
    opened = None
    if out is None and cfg.output:
        opened = out = open(cfg.output, "w")
    h = hashlib.sha256()
    rows = []
    try:
        if out is not None:
            out.write(dumps(header) + "\n")
            out.flush()
        for row in _map(_run_task, [(cfg, k, extra) for k in cfg.tasks], workers):
            line = dumps(row) + "\n"
            h.update(line.encode())
            rows.append(json.loads(line))
            if out is not None:
                out.write(line)
                out.flush()
        summary = summarize_rows(rows)
        errors = sum(1 for r in rows if "error" in r)
        trailer = {"type": "trailer", "rows": len(rows), "errors": errors, "sha256": h.hexdigest()}
        if out is not None:
            out.write(dumps({"type": "summary", "fields": summary}) + "\n")
            out.write(dumps(trailer) + "\n")
    finally:
        if opened:
            opened.close()
    if cfg.output:
        write_csv(Path(cfg.output).with_suffix(".csv"), summary)
    return ResultRecord(json.loads(dumps(header)), rows, json.loads(dumps(summary)), trailer)


# ---------------------------------------------------------------------------
# pooling


@dataclass
class Aggregate:
    config: dict
    blocks: int
    fields: dict  # name -> {count, mean, stderr, blockMeans, blockStderrs}


def pool(records: list[ResultRecord]) -> Aggregate:
    """Pool seed blocks: count-weighted means, stratified stderr."""
    if not records:
        raise UsageError("nothing to summarize")
    ids = [ExperimentConfig(**{k: v for k, v in r.header["config"].items()}).identity() for r in records]
    if any(i != ids[0] for i in ids[1:]):
        raise UsageError("mixed configs refused")
    seen = set()
    for r in records:
        tasks = {row["task"] for row in r.rows}
        if seen & tasks:
            raise UsageError("seed blocks overlap")
        seen |= tasks
    per = [numeric_fields(r.rows) for r in records]
    names = sorted(set().union(*[p.keys() for p in per]))
    out = {}
    for name in names:
        counts, means, ses = [], [], []
        for p in per:
            x = p.get(name, np.zeros(0))
            x = x[np.isfinite(x)]
            if len(x) == 0:
                continue
            counts.append(len(x))
            means.append(float(x.mean()))
            ses.append(float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else float("nan"))
        N = sum(counts)
        if N == 0:
            continue
        w = np.array(counts) / N
        mean = float(w @ np.array(means))
        se = float(math.sqrt(np.sum((w * np.array(ses)) ** 2)))
        out[name] = {"count": N, "mean": mean, "stderr": se, "blockMeans": means, "blockStderrs": ses}
    return Aggregate(ids[0], len(records), out)


def summarize(paths, csv_path=None) -> Aggregate:
    agg = pool([read_result(p) for p in paths])
    if csv_path:
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("field", "count", "mean", "stderr", "blocks"))
            for name, st in agg.fields.items():
                w.writerow([name, st["count"], format(st["mean"], ".17g"), format(st["stderr"], ".17g"), len(st["blockMeans"])])
    return agg


# ---------------------------------------------------------------------------
# selftest


def selftest(out=None) -> bool:
    """Exact identities at small scale; prints one PASS/FAIL line each."""
    out = out or sys.stdout
    from .capacity import capacity, equilibrium, extend_many
    from .corrector import xi_n, xi_n_bruteforce
    from .crossterms import chi_variants, dyadic_decompose, random_pair
    from .deviation import box_survival_power, box_survival_rate, cn_bruteforce, cn_exact
    from .folding import k_set, k_set_bruteforce
    from .green import default_cache, green_truncated, harmonicity_residual, phi_T
    from .lattice import PointSet, make_rng, simulate_walk

    c = default_cache(5)
    g0, g1 = c.values(np.array([[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]))
    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        out.write(f"{'PASS' if ok else 'FAIL'} {name} {detail}\n")

    check("singleton capacity", abs(capacity(np.zeros((1, 5), dtype=np.int64), c) - 1 / g0) < 1e-12)
    check("two-point capacity", abs(capacity(np.array([[0] * 5, [1, 0, 0, 0, 0]]), c) - 2 / (g0 + g1)) < 1e-12)
    pts = PointSet.from_array_unique(make_rng(0, 1).integers(-5, 6, size=(60, 5)))
    sol = extend_many(equilibrium(PointSet(pts.array()[:1]), c), pts.array()[1:])
    check("incremental extend", abs(sol.cap / capacity(pts, c) - 1) < 1e-9)
    viol = sum(len(chi_variants(*random_pair(5, 16, 0, t), c).violations()) for t in range(10))
    check("cross-term invariants", viol == 0, f"violations={viol}")
    res = dyadic_decompose(simulate_walk(64, 0, 5), 3, c).residual
    check("dyadic identity", res < 1e-8, f"residual={res:.3g}")
    check("G_2(e_1) = 1/10", abs(green_truncated([1, 0, 0, 0, 0], 2) - 0.1) < 1e-15)
    hr = float(np.abs(harmonicity_residual(make_rng(0, 2).integers(-8, 9, size=(50, 5)), c)).max())
    check("harmonicity", hr < 1e-9, f"max={hr:.3g}")
    check("phi_1 closed forms", abs(phi_T([0] * 5, 1, c) - (2 * g0 - 1)) < 1e-9 and abs(phi_T([1, 0, 0, 0, 0], 1, c) - 2 * g1) < 1e-9)
    check("box eigenvalue", abs(box_survival_rate(2) - 0.5) < 1e-15 and abs(box_survival_power(5, 3) - box_survival_rate(5)) < 1e-10)
    check("c_n exhaustive vs brute force", all(abs(cn_exact(n, 5, c).cn - cn_bruteforce(n, 5, c).cn) < 1e-12 for n in range(4)))
    w = simulate_walk(80, 3, 5)
    check("K_n sets", np.array_equal(k_set(w, 3.0, 0.02), k_set_bruteforce(w, 3.0, 0.02)))
    w = simulate_walk(30, 4, 5)
    dx = float(np.abs(xi_n(w, 5, c).perStep - xi_n_bruteforce(w, 5, c).perStep).max())
    check("corrector bordered vs fresh", dx < 1e-9, f"max={dx:.3g}")
    return all(checks)


# ---------------------------------------------------------------------------
# command line


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="walkcap", description="Capacity of random-walk ranges: experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "selftest":
            continue
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--d", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--zeta", type=float)
        p.add_argument("--T", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--first", type=int)
        p.add_argument("--seeds", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--C0", type=float)
        p.add_argument("-o", "--output")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="command-specific parameter")
        p.add_argument("--workers", type=int, default=1)
    s = sub.add_parser("summarize")
    s.add_argument("paths", nargs="+")
    s.add_argument("--csv")
    return ap


def config_from_args(args) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        with open(args.config) as f:
            values.update(parse_kv(f))
    for k in ("d", "n", "zeta", "T", "seed", "first", "seeds", "tol", "C0", "output"):
        v = getattr(args, k)
        if v is not None:
            values[k] = str(v)
    values.update(parse_kv(args.set))
    return config_from(args.command, values)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "selftest":
            return EXIT_OK if selftest() else EXIT_NUMERIC
        if args.command == "summarize":
            agg = summarize(args.paths, args.csv)
            sys.stdout.write(dumps({"config": agg.config, "blocks": agg.blocks, "fields": agg.fields}) + "\n")
            return EXIT_OK
        cfg = config_from_args(args)
        stream = None if cfg.output else io.TextIOWrapper(sys.stdout.buffer, write_through=True)
        rec = run(cfg, args.workers, stream)
        if stream is not None:
            stream.detach()
    except (UsageError, FileNotFoundError) as e:
        sys.stderr.write(f"walkcap: {e}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except TruncatedOutput as e:
        sys.stderr.write(f"walkcap: {e}\n")
        return EXIT_PARTIAL
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as e:
        sys.stderr.write(f"walkcap: numeric failure: {e}\n")
        return EXIT_NUMERIC
    return EXIT_PARTIAL if rec.errors else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
