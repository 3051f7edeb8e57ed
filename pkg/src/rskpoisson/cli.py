"""Command-line harness: seeded campaigns, reports and exit codes.

Subcommands ``rsk``, ``grow``, ``hammersley``, ``verify <id>`` and
``calibrate <id>``.  Exit code 0 means every check passed, 1 a statistical
(or exact) check failed, 2 a usage or input error.

Seeding: replicates are processed in fixed-size blocks.  Block ``b`` of
stream ``s`` for parameter index ``i`` draws from
``PCG64(SeedSequence(seed, spawn_key=(s, i, b)))``, so results do not
depend on ``--jobs`` or on scheduling.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from . import __version__, _kernels
from .hammersley import SpaceTimePoint, check_rsk_equivalence, read_points_csv, run_multiline, write_trace_csv
from .plancherel import ENUM_LIMIT, CapacityError, row_growth_table
from .stats import (CountingPaths, _check_window, gap_report, independence_from_counts, ks_exponential,
                    paths_from_labels, poisson_process_fit, rsk_label_counts, synthetic_poisson_paths,
                    tvd_with_ci, expected_plugin_tvd, vbar_label_counts, vbar_marginal_law,
                    _support_size, count_correlation, RescaledSets)
from .tableau import INF, DuplicateEntryError, rsk

EXIT_PASS, EXIT_REJECT, EXIT_USAGE = 0, 1, 2
BLOCK_SIZE = 1000
STREAMS = {"main": 1, "alt": 2, "alt2": 3, "boot": 4, "fit": 5, "null": 6, "words": 7}
# Extra room left of a gap window so that every point has its predecessor
# (a unit-rate gap exceeds 10 with probability e^-10).
GAP_MARGIN = 10.0
SEED_SCHEME = "PCG64(SeedSequence(seed, spawn_key=(stream, index, block)))"

VERIFY_IDS = ("poisson", "localQ", "localP", "tvd", "s_table", "exp_tail", "hammersley_equiv")
CALIBRATE_IDS = ("poisson", "localQ", "localP", "tvd", "exp_tail")

VERIFY_DEFAULTS = {
    "poisson": dict(n=[10000], k=2, c=5.0, reps=2000),
    "localQ": dict(n=[10000], k=1, c=3.0, reps=500),
    "localP": dict(n=[10000], k=0, c=3.0, w=[0.25, 1.0], reps=500),
    "tvd": dict(n=[400, 10000], ell=3, k=1, reps=10 ** 6, mode="marginal"),
    "s_table": dict(K=3, nmax=40),
    "exp_tail": dict(n=[10000], reps=2000),
    "hammersley_equiv": dict(words=1000, length=200, k=3),
}
CALIBRATE_DEFAULTS = {
    "poisson": dict(n=[10000], k=2, c=5.0, reps=2000, campaigns=100),
    "localQ": dict(n=[10000], k=1, c=3.0, reps=500, campaigns=100),
    "localP": dict(n=[10000], k=0, c=3.0, w=[0.25, 1.0], reps=500, campaigns=100),
    "tvd": dict(n=[10000], ell=3, k=1, reps=10 ** 5, mode="marginal", campaigns=100),
    "exp_tail": dict(n=[10000], reps=2000, campaigns=100),
}


class UsageError(ValueError):
    pass


@dataclass
class CampaignConfig:
    command: str
    target: Optional[str] = None
    n: Optional[List[int]] = None
    ell: Optional[int] = None
    k: Optional[int] = None
    c: Optional[float] = None
    w: Optional[List[float]] = None
    reps: Optional[int] = None
    K: Optional[int] = None
    nmax: Optional[int] = None
    words: Optional[int] = None
    length: Optional[int] = None
    campaigns: Optional[int] = None
    mode: Optional[str] = None
    n_boot: int = 200
    seed: int = 0
    alpha: float = 0.01
    enum_limit: int = ENUM_LIMIT
    block_size: int = BLOCK_SIZE
    out: Optional[str] = None
    jobs: int = 1

    # out and jobs cannot change any result, so they stay out of the hash
    # and out of report payloads.
    def payload(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("jobs")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise UsageError(msg)
        for name in ("ell", "k", "K"):
            v = getattr(self, name)
            need(v is None or v >= 0, f"--{name} must be non-negative")
        for name in ("reps", "nmax", "words", "length", "campaigns", "block_size", "jobs", "n_boot"):
            v = getattr(self, name)
            need(v is None or v >= 1, f"--{name.replace('_', '-')} must be positive")
        need(self.n is None or all(x >= 1 for x in self.n), "--n must be positive")
        need(self.c is None or self.c > 0, "--c must be positive")
        need(self.w is None or all(0 < x <= 1 for x in self.w), "--w must lie in (0, 1]")
        need(0 < self.alpha < 1, "--alpha must lie in (0, 1)")
        need(self.enum_limit >= 1, "--enum-limit must be positive")
        need(self.mode in (None, "marginal", "coarse"), "--mode must be marginal or coarse")
        need(self.seed >= 0, "--seed must be non-negative")
        if self.nmax is not None and self.nmax > self.enum_limit:
            raise UsageError(f"--nmax {self.nmax} exceeds --enum-limit {self.enum_limit}")
        return self


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    seed: int
    seed_scheme: str
    streams: Dict[str, List[int]]     # "stream/index" -> block sizes
    wall_clock: float
    version: str
    files: List[str] = field(default_factory=list)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path) as fh:
            return cls(**json.load(fh))

    def campaign_config(self) -> CampaignConfig:
        return CampaignConfig(**self.config)


def block_rng(seed: int, stream: str, index: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[stream], index, block))
    return np.random.Generator(np.random.PCG64(ss))


def _run_task(task):
    fn, seed, stream, index, block, args = task
    return fn(block_rng(seed, stream, index, block), *args)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    gating: bool = True


class Campaign:
    """One command run: config, seeded block execution and output files."""

    def __init__(self, cfg: CampaignConfig):
        self.cfg = cfg
        self.hash = cfg.config_hash()
        self.streams: Dict[str, List[int]] = {}
        self.checks: List[Check] = []
        self.results: dict = {}
        self.tables: Dict[str, tuple] = {}
        self.t0 = time.time()

    def _execute(self, tasks):
        if self.cfg.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(min(self.cfg.jobs, len(tasks))) as ex:
                return list(ex.map(_run_task, tasks))
        return [_run_task(t) for t in tasks]

    def blocks(self, fn, reps: int, args=(), stream="main", index=0):
        """``fn(rng, size, *args)`` over blocks of replicates, in block order."""
        bs = self.cfg.block_size
        sizes = [min(bs, reps - s) for s in range(0, reps, bs)]
        self.streams[f"{stream}/{index}"] = sizes
        return self._execute([(fn, self.cfg.seed, stream, index, b, (size,) + tuple(args))
                              for b, size in enumerate(sizes)])

    def tasks(self, fn, count: int, args=(), stream="null", index=0):
        """``fn(rng, *args)`` for ``count`` independent tasks (one block each)."""
        self.streams[f"{stream}/{index}"] = [1] * count
        return self._execute([(fn, self.cfg.seed, stream, index, b, tuple(args))
                              for b in range(count)])

    def rng(self, stream: str, index: int = 0) -> np.random.Generator:
        self.streams[f"{stream}/{index}"] = [1]
        return block_rng(self.cfg.seed, stream, index, 0)

    def check(self, name, passed, value=None, threshold=None, gating=True):
        self.checks.append(Check(name, bool(passed), _jsonable(value), _jsonable(threshold), gating))

    def table(self, name, header, rows):
        self.tables[name] = (list(header), [list(r) for r in rows])

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if all(c.passed for c in self.checks if c.gating) else EXIT_REJECT

    def report(self) -> dict:
        return {
            "command": self.cfg.command,
            "target": self.cfg.target,
            "config": self.cfg.payload(),
            "config_hash": self.hash,
            "seed": self.cfg.seed,
            "version": __version__,
            "checks": [asdict(c) for c in self.checks],
            "results": _jsonable(self.results),
            "exit_code": self.exit_code,
        }

    def finish(self, stream=None) -> int:
        stream = stream or sys.stdout
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            extra = "" if c.gating else " (not gating)"
            print(f"{tag} {c.name}: value={_fmt(c.value)} threshold={_fmt(c.threshold)}{extra}",
                  file=stream)
        if self.cfg.out is None:
            return self.exit_code
        out = self.cfg.out
        os.makedirs(os.path.join(out, "tables"), exist_ok=True)
        files = ["report.json"]
        with open(os.path.join(out, "report.json"), "w") as fh:
            json.dump(self.report(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        for name, (header, rows) in self.tables.items():
            rel = os.path.join("tables", f"{name}.csv")
            with open(os.path.join(out, rel), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header + ["config_hash", "seed"])
                for row in rows:
                    writer.writerow([_cell(v) for v in row] + [self.hash, self.cfg.seed])
            files.append(rel)
        files.append("manifest.json")
        manifest = RunManifest(asdict(self.cfg), self.hash, self.cfg.seed, SEED_SCHEME,
                               self.streams, time.time() - self.t0, __version__, files)
        manifest.write(os.path.join(out, "manifest.json"))
        print(f"wrote {out}", file=stream)
        return self.exit_code


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if v == INF:
        return "inf"
    return v


def _label_str(code, k):
    return "inf" if code > k else str(int(code))


# --------------------------------------------------------------------------
# Block workers (module level so they pickle)

def _paths_block(rng, size, n, c, k):
    i_lo, i_hi = _check_window(n, c)
    labels, _ = _kernels.grow_labels(rng, size, n + i_lo, i_hi - i_lo, k,
                                     _kernels.row_capacity(n + i_hi))
    return labels


def _prows_block(rng, size, n, k):
    return _kernels.bottom_rows(rng, size, n, k, _kernels.row_capacity(n))


def _grow_block(rng, size, n, ell, k):
    return _kernels.grow_labels(rng, size, n, ell, k, _kernels.row_capacity(n + ell))


def _vbar_block(rng, size, n, ell, k):
    u = rng.random((size, ell)) * math.sqrt(n)
    return np.where(u < k + 1, u.astype(np.int64), k + 1)


def _rsk_counts_block(rng, size, n, ell, k, mode):
    return rsk_label_counts(n, ell, k, size, rng, mode)


def _vbar_counts_block(rng, size, n, ell, k, mode):
    return vbar_label_counts(n, ell, k, size, rng, mode)


def _tail_block(rng, size, n):
    values, lengths = _kernels.bottom_rows(rng, size, n, 0, _kernels.row_capacity(n))
    return math.sqrt(n) * (1.0 - values[np.arange(size), 0, lengths[:, 0] - 1])


def _equiv_block(rng, size, length, k):
    fails = []
    for i in range(size):
        m = int(rng.integers(1, length + 1))
        rep = check_rsk_equivalence(rng.random(m).tolist(), k)
        if not rep.passed:
            fails.append((i, m, rep.first_divergence))
    return fails


def _labels_to_paths(cfg, blocks, n, c, k) -> CountingPaths:
    return paths_from_labels(n, c, k, np.concatenate(blocks, axis=0))


def _poisson_checks(camp: Campaign, fit, prefix=""):
    alpha = camp.cfg.alpha
    for r in fit.rows:
        camp.check(f"{prefix}row{r.row}_mean", abs(r.mean - 1) <= 3 * r.mean_se, r.mean,
                   f"1 +- {3 * r.mean_se:.4g}")
        camp.check(f"{prefix}row{r.row}_variance", abs(r.variance - 1) <= 3 * r.variance_se,
                   r.variance, f"1 +- {3 * r.variance_se:.4g}")
    for key, (cov, se) in fit.covariances.items():
        camp.check(f"{prefix}cov{key.replace(',', '_')}", abs(cov) <= 3 * se, cov, f"0 +- {3 * se:.4g}")
    m = len(fit.p_values())
    for r in fit.rows:
        camp.check(f"{prefix}row{r.row}_chi2", r.chi2_p >= alpha / m, r.chi2_p, alpha / m)
        camp.check(f"{prefix}row{r.row}_ks_gaps", r.ks_p >= alpha / m, r.ks_p, alpha / m)


def _fit_rows_table(camp, fit, n, reps):
    rows = []
    for r in fit.rows:
        rows.append((r.row, "chi2", r.chi2, r.chi2_p, r.chi2_df, n, reps))
        rows.append((r.row, "ks_gaps", r.ks, r.ks_p, "", n, reps))
        rows.append((r.row, "window_mean", r.mean, "", "", n, reps))
        rows.append((r.row, "window_variance", r.variance, "", "", n, reps))
    camp.table("rows", ["row", "statistic", "value", "p_value", "df", "n", "reps"], rows)
    camp.table("covariances", ["rows", "covariance", "standard_error"],
               [(key, cov, se) for key, (cov, se) in fit.covariances.items()])


# --------------------------------------------------------------------------
# verify

def verify_poisson(camp: Campaign):
    cfg = camp.cfg
    n, c, k = cfg.n[0], cfg.c, cfg.k
    _check_window(n, c)
    paths = _labels_to_paths(cfg, camp.blocks(_paths_block, cfg.reps, (n, c, k)), n, c, k)
    fit = poisson_process_fit(paths, 1.0, camp.rng("fit"))
    _poisson_checks(camp, fit)
    vals = paths.values()
    end = vals[:, -1, :].astype(float)
    se = end.std(axis=0, ddof=1) / math.sqrt(paths.reps)
    t_end = paths.times[-1]
    for r in range(k + 1):
        camp.check(f"row{r}_path_end_mean", abs(end[:, r].mean() - t_end) <= 3 * se[r],
                   float(end[:, r].mean()), f"{t_end:.4g} +- {3 * se[r]:.4g}", gating=False)
    camp.results["fit"] = fit.to_dict()
    _fit_rows_table(camp, fit, n, cfg.reps)
    mean_path = vals.mean(axis=0)
    camp.table("paths_mean", ["t"] + [f"row{r}" for r in range(k + 1)],
               [[float(t)] + [float(x) for x in mean_path[j]] for j, t in enumerate(paths.times)])
    rows = []
    for rep in range(min(5, paths.reps)):
        for r in range(k + 1):
            for i in paths.event_offsets(rep, r):
                rows.append((rep, r, int(i), i / math.sqrt(n)))
    camp.table("path_events", ["rep", "row", "offset", "t"], rows)


def _q_sets(paths: CountingPaths) -> List[RescaledSets]:
    root = math.sqrt(paths.n)
    return [RescaledSets([paths.event_offsets(rep, y) / root for y in range(paths.k + 1)])
            for rep in range(paths.reps)]


def verify_localQ(camp: Campaign):
    cfg = camp.cfg
    n, c, k = cfg.n[0], cfg.c, cfg.k
    wide = c + GAP_MARGIN
    _check_window(n, wide)
    paths = _labels_to_paths(cfg, camp.blocks(_paths_block, cfg.reps, (n, wide, k)), n, wide, k)
    sets = _q_sets(paths)
    window = (-c, c)
    rows = []
    for y in range(k + 1):
        rep = gap_report([s[y] for s in sets], window, 1.0)
        camp.check(f"row{y}_mean_gap", abs(rep.mean_gap - 1) <= 0.05, rep.mean_gap, "1 +- 5%")
        camp.check(f"row{y}_ks_gaps", rep.ks_p >= cfg.alpha / (k + 1), rep.ks_p, cfg.alpha / (k + 1))
        camp.results[f"row{y}"] = rep.to_dict()
        rows.append((y, rep.gaps, rep.mean_gap, rep.mean_gap_se, rep.ks, rep.ks_p, n, cfg.reps))
    for y in range(k + 1):
        for z in range(y + 1, k + 1):
            corr, se = count_correlation(sets, (y, z), window)
            camp.check(f"corr{y}_{z}", abs(corr) <= 3 * se, corr, f"0 +- {3 * se:.4g}")
    camp.table("gaps", ["row", "gaps", "mean_gap", "mean_gap_se", "ks", "p_value", "n", "reps"], rows)
    camp.table("points", ["rep", "row", "point"],
               [(i, y, float(x)) for i, s in enumerate(sets[:20]) for y in range(k + 1)
                for x in s[y] if -c - GAP_MARGIN <= x <= c])


def verify_localP(camp: Campaign):
    cfg = camp.cfg
    n, c, k = cfg.n[0], cfg.c, cfg.k
    root = math.sqrt(n)
    rows, pts_rows = [], []
    for i, w in enumerate(cfg.w):
        blocks = camp.blocks(_prows_block, cfg.reps, (n, k), index=i)
        values = np.concatenate([b[0] for b in blocks])
        lengths = np.concatenate([b[1] for b in blocks])
        for y in range(k + 1):
            sets = [root * (values[rep, y, :lengths[rep, y]] - w) for rep in range(len(values))]
            rep = gap_report(sets, (-c, c), 1 / math.sqrt(w))
            name = f"w{w:g}_row{y}"
            camp.check(f"{name}_mean_gap", abs(rep.mean_gap - math.sqrt(w)) <= 0.05 * math.sqrt(w),
                       rep.mean_gap, f"{math.sqrt(w):.4g} +- 5%")
            if w == 1:
                top = max(float(s.max()) for s in sets if len(s))
                camp.check(f"{name}_nonpositive", top <= 0, top, 0.0)
            camp.check(f"{name}_ks_gaps", rep.ks_p >= cfg.alpha, rep.ks_p, cfg.alpha, gating=(w == 1))
            camp.results[name] = rep.to_dict()
            rows.append((w, y, rep.gaps, rep.mean_gap, rep.mean_gap_se, rep.ks, rep.ks_p, n, cfg.reps))
            pts_rows += [(w, j, y, float(x)) for j, s in enumerate(sets[:20])
                         for x in s[(s >= -c - GAP_MARGIN) & (s <= c)]]
    camp.table("gaps", ["w", "row", "gaps", "mean_gap", "mean_gap_se", "ks", "p_value", "n", "reps"], rows)
    camp.table("points", ["w", "rep", "row", "point"], pts_rows)


def _tvd_estimate(camp: Campaign, i, n, ell, k, reps, mode):
    support = _support_size(ell, k, mode, 2)
    if reps < 100 * support:
        raise CapacityError(f"reps={reps} below 100 x support size {support}")
    if n < (k + 1) ** 2:
        raise UsageError(f"need n >= (k+1)^2 = {(k + 1) ** 2}")
    args = (n, ell, k, mode)
    cv = np.sum(camp.blocks(_rsk_counts_block, reps, args, "main", i), axis=0)
    cb = np.sum(camp.blocks(_vbar_counts_block, reps, args, "alt", i), axis=0)
    cb2 = np.sum(camp.blocks(_vbar_counts_block, reps, args, "alt2", i), axis=0)
    est = independence_from_counts(cv, cb, cb2, n, ell, k, camp.rng("boot", i), mode,
                                   camp.cfg.n_boot, 1 - camp.cfg.alpha)
    return est, cv, cb


def verify_tvd(camp: Campaign):
    cfg = camp.cfg
    ests, rows = [], []
    for i, n in enumerate(cfg.n):
        est, cv, cb = _tvd_estimate(camp, i, n, cfg.ell, cfg.k, cfg.reps, cfg.mode)
        ests.append(est)
        base = est.baseline if est.baseline is not None else est.baseline_empirical
        camp.check(f"n{n}_below_0.02_plus_baseline", est.value < 0.02 + base, est.value, 0.02 + base)
        if est.baseline is not None:
            lo, hi = est.baseline_ci
            camp.check(f"n{n}_same_law_matches_baseline", lo <= est.baseline <= hi,
                       est.baseline_empirical, [lo, hi], gating=False)
        camp.results[f"n{n}"] = est.to_dict()
        rows.append((n, cfg.ell, cfg.k, est.value, est.ci[0], est.ci[1], est.baseline,
                     est.baseline_empirical, est.support_size, est.reps))
        camp.table(f"counts_n{n}", ["code", "rsk", "independent"],
                   [(j, int(a), int(b)) for j, (a, b) in enumerate(zip(cv, cb))])
    order = np.argsort(cfg.n)
    for a, b in zip(order, order[1:]):
        camp.check(f"trend_n{cfg.n[b]}_below_n{cfg.n[a]}", ests[b].value < ests[a].value,
                   ests[b].value, ests[a].value)
    camp.table("tvd", ["n", "ell", "k", "value", "ci_low", "ci_high", "baseline",
                       "baseline_empirical", "support", "reps"], rows)


def verify_s_table(camp: Campaign):
    cfg = camp.cfg
    table = row_growth_table(cfg.K, cfg.nmax, cfg.enum_limit)
    rows = []
    for K in range(cfg.K + 1):
        s = [sum(t[:K + 1], Fraction(0)) for t in table]
        mono = all(b <= a for a, b in zip(s, s[1:]))
        bound = all(x * x * n <= (K + 1) ** 2 for n, x in enumerate(s, start=1))
        camp.check(f"K{K}_weakly_decreasing", mono, None, None)
        camp.check(f"K{K}_bound", bound, None, f"s_n <= {K + 1}/sqrt(n)")
        for n, x in enumerate(s, start=1):
            rows.append((K, n, x.numerator, x.denominator, float(x), (K + 1) / math.sqrt(n)))
    camp.table("s_table", ["K", "n", "numerator", "denominator", "value", "bound"], rows)
    camp.table("row_growth", ["n", "r", "numerator", "denominator", "value"],
               [(n, r, q.numerator, q.denominator, float(q))
                for n, t in enumerate(table, start=1) for r, q in enumerate(t)])


def verify_exp_tail(camp: Campaign):
    cfg = camp.cfg
    n = cfg.n[0]
    if n < 100:
        raise UsageError("exp_tail needs n >= 100")
    x = np.concatenate(camp.blocks(_tail_block, cfg.reps, (n,)))
    rep = ks_exponential(x, n)
    camp.check("positive", rep.minimum > 0, rep.minimum, 0.0)
    camp.check("mean", abs(rep.mean - 1) <= 3 * rep.mean_se, rep.mean, f"1 +- {3 * rep.mean_se:.4g}")
    camp.check("ks", rep.ks_p >= cfg.alpha, rep.ks_p, cfg.alpha)
    camp.results["ks"] = rep.to_dict()
    camp.table("samples", ["rep", "value"], [(i, float(v)) for i, v in enumerate(x)])


def verify_hammersley_equiv(camp: Campaign):
    cfg = camp.cfg
    fails = [f for b in camp.blocks(_equiv_block, cfg.words, (cfg.length, cfg.k), "words") for f in b]
    camp.check("all_words_equivalent", not fails, len(fails), 0)
    camp.results["failures"] = fails[:20]
    camp.table("failures", ["word", "length", "divergence"], [(i, m, d) for i, m, d in fails])


VERIFY = {
    "poisson": verify_poisson, "localQ": verify_localQ, "localP": verify_localP,
    "tvd": verify_tvd, "s_table": verify_s_table, "exp_tail": verify_exp_tail,
    "hammersley_equiv": verify_hammersley_equiv,
}


# --------------------------------------------------------------------------
# calibrate: the same pipelines on null and alternative models

def _null_poisson(rng, n, c, k, reps, alpha, kind):
    paths = synthetic_poisson_paths(n, c, k, reps, rng, kind=kind)
    fit = poisson_process_fit(paths, 1.0, rng)
    return fit.rejected(alpha), min(fit.p_values())


def _poisson_points(rng, lo, hi, intensity):
    m = rng.poisson(intensity * (hi - lo))
    return np.sort(rng.uniform(lo, hi, m))


def _lattice_points(rng, lo, hi, spacing):
    return np.arange(lo + spacing * rng.random(), hi, spacing)


def _null_gaps(rng, windows, intensities, reps, alpha, kind):
    # One KS test per (window, intensity); Bonferroni across them.
    make = _poisson_points if kind == "poisson" else (lambda r, a, b, lam: _lattice_points(r, a, b, 1 / lam))
    ps = []
    for (lo, hi), lam in zip(windows, intensities):
        start = lo - GAP_MARGIN / lam
        rep = gap_report([make(rng, start, hi, lam) for _ in range(reps)], (lo, hi), lam)
        ps.append(rep.ks_p)
    return min(ps) < alpha / len(ps), min(ps)


def _null_tail(rng, reps, alpha, kind):
    x = rng.exponential(1.0, reps) if kind == "poisson" else np.ones(reps)
    rep = ks_exponential(x)
    return rep.ks_p < alpha, rep.ks_p


def _null_tvd(rng, n, ell, k, reps, alpha, kind, n_boot):
    law = vbar_marginal_law(n, ell, k)
    a = rng.multinomial(reps, law)
    if kind == "poisson":
        b = rng.multinomial(reps, law)
    else:
        b = np.zeros_like(a)
        b[-1] = reps      # every label above row k
    value, ci = tvd_with_ci(a, b, rng, n_boot, 1 - alpha)
    baseline = expected_plugin_tvd(law, reps, reps)
    return not (ci[0] <= baseline <= ci[1]), value


def _calibration_windows(cfg):
    if cfg.target == "localQ":
        return [(-cfg.c, cfg.c)] * (cfg.k + 1), [1.0] * (cfg.k + 1)
    windows, lams = [], []
    for w in cfg.w:
        windows.append((-cfg.c, 0.0 if w == 1 else cfg.c))
        lams.append(1 / math.sqrt(w))
    return windows, lams


def calibrate(camp: Campaign):
    cfg = camp.cfg
    t = cfg.target
    if t == "poisson":
        _check_window(cfg.n[0], cfg.c)
        args = (cfg.n[0], cfg.c, cfg.k, cfg.reps, cfg.alpha)
        fn = _null_poisson
    elif t in ("localQ", "localP"):
        windows, lams = _calibration_windows(cfg)
        args = (windows, lams, cfg.reps, cfg.alpha)
        fn = _null_gaps
    elif t == "exp_tail":
        args = (cfg.reps, cfg.alpha)
        fn = _null_tail
    elif t == "tvd":
        n = cfg.n[0]
        args = (n, cfg.ell, cfg.k, cfg.reps, cfg.alpha)
        fn = _null_tvd
        curve = []
        law = vbar_marginal_law(n, cfg.ell, cfg.k)
        rng = camp.rng("main")
        for reps in sorted({max(1, cfg.reps // 100), max(1, cfg.reps // 10), cfg.reps}):
            emp = 0.5 * float(np.abs(rng.multinomial(reps, law) / reps - rng.multinomial(reps, law) / reps).sum())
            curve.append((n, reps, emp, expected_plugin_tvd(law, reps, reps)))
        camp.table("baseline_curve", ["n", "reps", "same_law_tvd", "analytic_baseline"], curve)
        camp.results["baseline_curve"] = curve
    else:
        raise UsageError(f"no null model for {t!r}")
    extra = (cfg.n_boot,) if t == "tvd" else ()
    null = camp.tasks(fn, cfg.campaigns, args + ("poisson",) + extra, "null", 0)
    alt = camp.tasks(fn, 3, args + ("deterministic",) + extra, "null", 1)
    rate = 1 - np.mean([r for r, _ in null])
    power = float(np.mean([r for r, _ in alt]))
    camp.check("null_non_rejection_rate", rate >= 0.95, float(rate), 0.95)
    camp.check("alternative_power", power == 1.0, power, 1.0)
    camp.results.update(null_non_rejection=float(rate), power=power, campaigns=cfg.campaigns)
    camp.table("campaigns", ["model", "campaign", "rejected", "statistic"],
               [("null", i, int(r), s) for i, (r, s) in enumerate(null)]
               + [("alternative", i, int(r), s) for i, (r, s) in enumerate(alt)])


# --------------------------------------------------------------------------
# rsk, grow, hammersley

def parse_letters(text: str) -> list:
    out = []
    for tok in text.split():
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise UsageError(f"not a number: {tok!r}") from None
    return out


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def cmd_rsk(cfg: CampaignConfig, word_file: Optional[str]) -> int:
    if word_file is not None:
        word = parse_letters(_read_text(word_file))
    elif cfg.n:
        word = block_rng(cfg.seed, "words", 0, 0).random(cfg.n[0]).tolist()
    else:
        word = parse_letters(sys.stdin.read())
    try:
        P, Q, shape = rsk(word)
    except DuplicateEntryError as exc:
        raise UsageError(str(exc)) from None
    keep = len(shape) if cfg.k is None else cfg.k + 1
    doc = {"word_length": len(word), "shape": list(shape), "P": P.rows[:keep], "Q": Q.rows[:keep],
           "config_hash": cfg.config_hash(), "seed": cfg.seed}
    text = json.dumps(doc)
    print(text)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "rsk.json"), "w") as fh:
            fh.write(text + "\n")
    return EXIT_PASS


def cmd_grow(camp: Campaign, independent: bool) -> int:
    cfg = camp.cfg
    n, ell, k = cfg.n[0], cfg.ell, cfg.k
    if independent:
        if n < (k + 1) ** 2:
            raise UsageError(f"need n >= (k+1)^2 = {(k + 1) ** 2}")
        labels = np.concatenate(camp.blocks(_vbar_block, cfg.reps, (n, ell, k), "alt"))
        lengths = None
    else:
        blocks = camp.blocks(_grow_block, cfg.reps, (n, ell, k))
        labels = np.concatenate([b[0] for b in blocks])
        lengths = np.concatenate([b[1] for b in blocks])
    camp.table("labels", ["rep", "step", "label"],
               [(i, n + j + 1, _label_str(labels[i, j], k))
                for i in range(labels.shape[0]) for j in range(labels.shape[1])])
    if lengths is not None:
        camp.table("bottom_rows", ["rep"] + [f"lambda{r}" for r in range(k + 1)],
                   [[i] + [int(x) for x in row] for i, row in enumerate(lengths)])
    freq = {_label_str(c, k): int(np.count_nonzero(labels == c)) for c in range(k + 2)}
    camp.results["label_frequencies"] = freq
    print(json.dumps({"label_frequencies": freq, "reps": cfg.reps, "n": n, "ell": ell, "k": k}))
    return camp.finish()


def cmd_hammersley(camp: Campaign, points_file: Optional[str]) -> int:
    cfg = camp.cfg
    if points_file is not None:
        points = read_points_csv(points_file)
    else:
        m = cfg.n[0] if cfg.n else 20
        xs = camp.rng("main").random(m)
        points = [SpaceTimePoint(float(x), t) for t, x in enumerate(xs, start=1)]
    state = run_multiline(points, cfg.k if cfg.k is not None else 0)
    lines = [list(line.positions) for line in state.lines]
    camp.results.update(lines=lines, points=len(points),
                        events=[len(tr) for tr in state.traces])
    rows = [(y, ev.t, ev.kind, "" if ev.x_old is None else ev.x_old, ev.x_new)
            for y, tr in enumerate(state.traces) for ev in tr]
    camp.table("trace", ["line", "t", "kind", "x_old", "x_new"], rows)
    print(json.dumps({"lines": lines}))
    return camp.finish()


# --------------------------------------------------------------------------
# argument parsing

def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, nargs="+")
    common.add_argument("--ell", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--c", type=float)
    common.add_argument("--w", type=float, nargs="+")
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", type=float, default=0.01)
    common.add_argument("--out")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--enum-limit", type=int, default=ENUM_LIMIT)
    common.add_argument("--block-size", type=int, default=BLOCK_SIZE)
    common.add_argument("--n-boot", type=int, default=200)
    common.add_argument("--K", type=int)
    common.add_argument("--nmax", type=int)
    common.add_argument("--words", type=int)
    common.add_argument("--len", dest="length", type=int)
    common.add_argument("--campaigns", type=int)
    common.add_argument("--mode", choices=["marginal", "coarse"])
    common.add_argument("--from-manifest", help="rerun the configuration stored in a manifest")

    parser = argparse.ArgumentParser(prog="rskpoisson", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("rsk", parents=[common], help="insertion and recording tableaux of a word")
    p.add_argument("word_file", nargs="?", help="whitespace-separated letters ('-' for stdin)")
    p = sub.add_parser("grow", parents=[common], help="sample growth labels")
    p.add_argument("--independent", action="store_true", help="independent labels instead of RSK")
    p = sub.add_parser("hammersley", parents=[common], help="multi-line Hammersley process")
    p.add_argument("--points", help="CSV of x,t points")
    p = sub.add_parser("verify", parents=[common], help="run a theorem check campaign")
    p.add_argument("target", choices=VERIFY_IDS)
    p = sub.add_parser("calibrate", parents=[common], help="run a pipeline on its null model")
    p.add_argument("target", choices=CALIBRATE_IDS)
    return parser


def config_from_args(args) -> CampaignConfig:
    if args.from_manifest:
        cfg = RunManifest.read(args.from_manifest).campaign_config()
        cfg.out, cfg.jobs = args.out, args.jobs
        return cfg.validate()
    names = {f.name for f in fields(CampaignConfig)}
    values = {k: v for k, v in vars(args).items() if k in names}
    cfg = CampaignConfig(**values)
    target = getattr(args, "target", None)
    defaults = {}
    if args.command == "verify":
        defaults = VERIFY_DEFAULTS[target]
    elif args.command == "calibrate":
        defaults = CALIBRATE_DEFAULTS[target]
    elif args.command == "grow":
        defaults = dict(n=[10000], ell=3, k=1, reps=1000)
    for key, val in defaults.items():
        if getattr(cfg, key) is None:
            setattr(cfg, key, val)
    if args.command in ("verify", "calibrate", "grow", "hammersley") and cfg.out is None:
        cfg.out = os.path.join("runs", "_".join(filter(None, [cfg.command, cfg.target, cfg.config_hash()])))
    return cfg.validate()


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command == "rsk":
            return cmd_rsk(cfg, args.word_file)
        camp = Campaign(cfg)
        if cfg.command == "grow":
            return cmd_grow(camp, args.independent)
        if cfg.command == "hammersley":
            return cmd_hammersley(camp, args.points)
        if cfg.command == "verify":
            VERIFY[cfg.target](camp)
        else:
            calibrate(camp)
        return camp.finish()
    except (UsageError, CapacityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
