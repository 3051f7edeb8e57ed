"""Total variation distance and Poisson-limit diagnostics for RSK growth."""

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from . import _kernels
from .plancherel import CapacityError, ExactMeasure
from .tableau import Tableau


# --------------------------------------------------------------------------
# Total variation distance

@dataclass
class EmpiricalDistribution:
    counts: Dict[object, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        return cls(dict(Counter(samples)))

    def probabilities(self) -> Dict[object, float]:
        total = self.total
        return {x: c / total for x, c in self.counts.items()}


def _as_pmf(d) -> Mapping:
    if isinstance(d, EmpiricalDistribution):
        if d.total == 0:
            raise ValueError("empty distribution")
        return d.probabilities()
    if isinstance(d, ExactMeasure):
        return d.as_dict()
    if not d:
        raise ValueError("empty distribution")
    return d


def tvd(p, q):
    """Half the l1 distance between two distributions on a discrete set.

    Accepts :class:`EmpiricalDistribution`, :class:`ExactMeasure` or plain
    ``{outcome: probability}`` mappings; the union of supports is used.
    Exact rational inputs give an exact result.
    """
    p, q = _as_pmf(p), _as_pmf(q)
    total = sum(abs(p.get(x, 0) - q.get(x, 0)) for x in set(p) | set(q))
    if isinstance(total, Fraction):
        return total / 2
    return 0.5 * float(total)


def _binom_window(n, p):
    sd = math.sqrt(n * p * (1 - p))
    lo = max(0, int(n * p - 12 * sd - 2))
    hi = min(n, int(n * p + 12 * sd + 2))
    xs = np.arange(lo, hi + 1)
    return xs, sps.binom.pmf(xs, n, p)


def expected_plugin_tvd(probs: Sequence[float], n1: int, n2: Optional[int] = None) -> float:
    """Expected plug-in TVD under a common law ``probs``.

    With ``n2=None`` one sample of size ``n1`` is compared to the exact
    law; otherwise two independent samples of sizes ``n1`` and ``n2``.  The
    expectation of a sum of cell terms only needs the binomial marginals, so
    the result is exact up to truncating each pmf at 12 standard deviations.
    Cells with variance above 400 in every sample use the normal limit.
    """
    total = 0.0
    for p in probs:
        if p <= 0 or p >= 1:
            continue
        if min(n1, n2 or n1) * p * (1 - p) > 400:
            v = p * (1 - p) * (1 / n1 + (1 / n2 if n2 else 0.0))
            total += math.sqrt(2 * v / math.pi)
            continue
        x1, w1 = _binom_window(n1, p)
        if n2 is None:
            total += float(np.sum(w1 * np.abs(x1 / n1 - p)))
        else:
            x2, w2 = _binom_window(n2, p)
            diff = np.abs(np.subtract.outer(x1 / n1, x2 / n2))
            total += float(w1 @ diff @ w2)
    return 0.5 * total


@dataclass
class TVDEstimate:
    value: float
    ci: tuple
    support_size: int
    reps: int
    baseline: Optional[float] = None
    baseline_empirical: Optional[float] = None
    baseline_ci: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _tvd_counts(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(a / a.sum() - b / b.sum()).sum())


def tvd_with_ci(counts_p: np.ndarray, counts_q: np.ndarray, rng, n_boot: int = 200,
                level: float = 0.95):
    """Plug-in TVD of two count vectors and a normal bootstrap interval.

    Both samples are resampled from their own empirical laws; the interval
    is ``value +- z * sd(bootstrap)`` so it always contains the estimate.
    """
    counts_p = np.asarray(counts_p, dtype=np.int64)
    counts_q = np.asarray(counts_q, dtype=np.int64)
    value = _tvd_counts(counts_p, counts_q)
    pp, pq = counts_p / counts_p.sum(), counts_q / counts_q.sum()
    boots = np.array([
        _tvd_counts(rng.multinomial(counts_p.sum(), pp), rng.multinomial(counts_q.sum(), pq))
        for _ in range(n_boot)
    ])
    z = sps.norm.ppf(0.5 + level / 2)
    sd = float(boots.std(ddof=1)) if n_boot > 1 else 0.0
    return value, (max(0.0, value - z * sd), min(1.0, value + z * sd))


# --------------------------------------------------------------------------
# Counting paths of the bottom rows

def window_offsets(n: int, c: float):
    """``(floor(-c sqrt n), floor(c sqrt n))``: the step offsets spanning [-c, c]."""
    root = math.sqrt(n)
    return math.floor(-c * root), math.floor(c * root)


@dataclass
class CountingPath:
    times: np.ndarray      # t_i = i / sqrt(n)
    values: np.ndarray     # (len(times), k+1), Lambda^(n+i) - Lambda^(n)


@dataclass
class CountingPaths:
    """Row-growth increments of many replicates over one window.

    ``increments[rep, s, r]`` is the growth of row ``r`` at step
    ``n + i_lo + s + 1``.  Paths from the growth process have at most one
    unit per step; synthetic Poisson paths may have more.
    """
    n: int
    c: float
    k: int
    i_lo: int
    i_hi: int
    increments: np.ndarray

    @property
    def reps(self) -> int:
        return self.increments.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.i_lo, self.i_hi + 1)

    @property
    def times(self) -> np.ndarray:
        return self.offsets / math.sqrt(self.n)

    def values(self) -> np.ndarray:
        """Counting path values, shape ``(reps, L + 1, k + 1)``, zero at ``t = 0``."""
        inc = self.increments.astype(np.int32)
        cum = np.zeros((inc.shape[0], inc.shape[1] + 1, inc.shape[2]), np.int32)
        np.cumsum(inc, axis=1, out=cum[:, 1:, :])
        return cum - cum[:, [-self.i_lo], :]

    def path(self, rep: int) -> CountingPath:
        return CountingPath(self.times, self.values()[rep])

    def event_offsets(self, rep: int, row: int) -> np.ndarray:
        """Offsets ``i`` of the growth events of ``row`` (repeated if multiple)."""
        inc = self.increments[rep, :, row]
        steps = np.nonzero(inc)[0]
        return np.repeat(steps + self.i_lo + 1, inc[steps])


def _check_window(n, c):
    if n < 1:
        raise ValueError("n must be at least 1")
    i_lo, i_hi = window_offsets(n, c)
    if n + i_lo < 0:
        raise ValueError(f"window c={c} reaches before step 0 for n={n}")
    return i_lo, i_hi


def paths_from_labels(n: int, c: float, k: int, labels: np.ndarray) -> CountingPaths:
    """Build paths from label codes ``0..k`` (``k + 1`` meaning above row k)."""
    i_lo, i_hi = _check_window(n, c)
    labels = np.asarray(labels)
    if labels.shape[1] != i_hi - i_lo:
        raise ValueError("label array does not match the window length")
    inc = (labels[:, :, None] == np.arange(k + 1)[None, None, :]).astype(np.int8)
    return CountingPaths(n, c, k, i_lo, i_hi, inc)


def counting_paths(n: int, c: float, k: int, reps: int, rng) -> CountingPaths:
    """Sample ``Lambda^(n+i) - Lambda^(n)`` for ``floor(-c sqrt n) <= i <= floor(c sqrt n)``."""
    i_lo, i_hi = _check_window(n, c)
    labels, _ = _kernels.grow_labels(rng, reps, n + i_lo, i_hi - i_lo, k,
                                     _kernels.row_capacity(n + i_hi))
    return paths_from_labels(n, c, k, labels)


def synthetic_poisson_paths(n: int, c: float, k: int, reps: int, rng, rate: float = 1.0,
                            kind: str = "poisson") -> CountingPaths:
    """Null-model paths on the same grid.

    ``kind="poisson"``: independent Poisson(rate / sqrt n) counts per step and
    row.  ``kind="labels"``: independent labels with probability
    ``rate / sqrt n`` per row, as in the independent growth vector.
    ``kind="deterministic"``: each row grows exactly once every
    ``round(sqrt n / rate)`` steps (an alternative that must be rejected).
    """
    i_lo, i_hi = _check_window(n, c)
    L = i_hi - i_lo
    p = rate / math.sqrt(n)
    if kind == "poisson":
        inc = rng.poisson(p, size=(reps, L, k + 1)).astype(np.int8)
    elif kind == "labels":
        u = rng.random((reps, L)) / p
        labels = np.where(u < k + 1, u.astype(np.int64), k + 1)
        return paths_from_labels(n, c, k, labels)
    elif kind == "deterministic":
        period = max(1, round(1 / p))
        steps = np.arange(i_lo + 1, i_hi + 1)
        inc = np.zeros((reps, L, k + 1), np.int8)
        for r in range(k + 1):
            inc[:, :, r] = ((steps + r) % period == 0)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return CountingPaths(n, c, k, i_lo, i_hi, inc)


# --------------------------------------------------------------------------
# Poisson process goodness of fit

@dataclass
class RowFit:
    row: int
    events: int
    windows: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    chi2: float
    chi2_df: int
    chi2_p: float
    ks: float
    ks_p: float
    gaps: int


@dataclass
class PoissonFitReport:
    rate: float
    reps: int
    rows: List[RowFit]
    covariances: Dict[str, tuple]   # "r,s" -> (covariance, standard error)
    meta: dict = field(default_factory=dict)

    def p_values(self) -> List[float]:
        return [p for row in self.rows for p in (row.chi2_p, row.ks_p)]

    def rejected(self, alpha: float) -> bool:
        """Bonferroni-corrected rejection over all rows and both tests."""
        ps = self.p_values()
        return min(ps) < alpha / len(ps)

    def to_dict(self):
        return asdict(self)

    def table(self):
        """``(row, statistic, value, p_value, df)`` records for CSV export."""
        out = []
        for r in self.rows:
            out.append((r.row, "chi2", r.chi2, r.chi2_p, r.chi2_df))
            out.append((r.row, "ks_gaps", r.ks, r.ks_p, ""))
            out.append((r.row, "mean", r.mean, "", ""))
            out.append((r.row, "variance", r.variance, "", ""))
        return out


def unit_window_counts(paths: CountingPaths):
    """Counts per row in every unit window ``[j, j+1]`` inside ``[-c, c]``.

    Returns ``(counts, lengths)``: ``counts`` has shape
    ``(reps, windows, k + 1)`` and ``lengths`` the window lengths in ``t``
    (exactly 1 up to the step grid).
    """
    root = math.sqrt(paths.n)
    js = range(math.ceil(-paths.c), math.floor(paths.c))
    cum = np.concatenate([np.zeros((paths.reps, 1, paths.k + 1), np.int32),
                          np.cumsum(paths.increments, axis=1, dtype=np.int32)], axis=1)
    counts, lengths = [], []
    for j in js:
        a = math.floor(j * root) - paths.i_lo
        b = math.floor((j + 1) * root) - paths.i_lo
        if a < 0 or b > paths.increments.shape[1]:
            continue
        counts.append(cum[:, b, :] - cum[:, a, :])
        lengths.append((b - a) / root)
    if not counts:
        raise ValueError("window [-c, c] contains no unit window")
    return np.stack(counts, axis=1), np.array(lengths)


def _merged_cells(expected: np.ndarray, min_expected: float = 5.0):
    """Group consecutive cells (last one open-ended) to reach ``min_expected``."""
    groups, cur, acc = [], [], 0.0
    for i, e in enumerate(expected):
        cur.append(i)
        acc += e
        if acc >= min_expected:
            groups.append(cur)
            cur, acc = [], 0.0
    if cur:
        if groups:
            groups[-1].extend(cur)
        else:
            groups.append(cur)
    return groups


def poisson_chi2(counts: np.ndarray, means: np.ndarray):
    """Chi-square of integer counts against Poisson laws with the given means.

    ``means`` holds one mean per count (windows may differ by a grid step).
    Returns ``(statistic, df, p_value)``.
    """
    counts = np.asarray(counts)
    means = np.broadcast_to(np.asarray(means, dtype=float), counts.shape).ravel()
    counts = counts.ravel()
    top = int(max(counts.max(), sps.poisson.isf(1e-12, means.max()))) + 1
    xs = np.arange(top + 1)
    uniq, inv = np.unique(means, return_inverse=True)
    weights = np.bincount(inv, minlength=len(uniq))
    probs = sps.poisson.pmf(xs[None, :], uniq[:, None])
    probs[:, -1] = sps.poisson.sf(xs[-2], uniq)
    expected = weights @ probs
    observed = np.bincount(np.minimum(counts, top), minlength=top + 1).astype(float)
    groups = _merged_cells(expected)
    obs = np.array([observed[g].sum() for g in groups])
    exp = np.array([expected[g].sum() for g in groups])
    if len(groups) < 2:
        return 0.0, 0, 1.0
    stat = float(((obs - exp) ** 2 / exp).sum())
    df = len(groups) - 1
    return stat, df, float(sps.chi2.sf(stat, df))


def gap_pit(paths: CountingPaths, row: int, rng, rate: float = 1.0) -> np.ndarray:
    """Probability-integral transforms of the inter-event gaps of one row.

    An event at step offset ``i`` happens somewhere in ``((i-1)/sqrt n,
    i/sqrt n]``; uniform placement turns lattice times into continuous
    ones.  A gap starting at ``x`` is only observed when it ends before the
    window end ``T``, so it is transformed with the Exponential(rate) law
    truncated at ``T - x``: ``F(g) / F(T - x)``.  For a Poisson process
    these values are i.i.d. uniform on ``(0, 1)``; the unconditioned gaps
    inside a finite window are not exponential (long gaps are cut off).
    """
    root = math.sqrt(paths.n)
    end = paths.i_hi / root
    out = []
    for rep in range(paths.reps):
        offs = paths.event_offsets(rep, row)
        if len(offs) < 2:
            continue
        t = np.sort((offs - rng.random(len(offs))) / root)
        g = np.diff(t)
        room = end - t[:-1]
        out.append(-np.expm1(-rate * g) / -np.expm1(-rate * room))
    return np.concatenate(out) if out else np.empty(0)


def poisson_process_fit(paths: CountingPaths, rate: float = 1.0, rng=None,
                        min_reps: int = 100) -> PoissonFitReport:
    """Test whether each row's counting path looks like a Poisson process.

    Per row: unit-window counts (all disjoint unit windows of every
    replicate, pooled) are summarised by mean and variance with standard
    errors and chi-squared against Poisson(rate * window length);
    inter-event gaps are KS-tested against Exponential(rate), truncated at
    the window end (see :func:`gap_pit`).  Pairwise
    covariances of the window counts between rows are reported with
    standard errors.
    """
    if paths.reps < min_reps:
        raise CapacityError(f"need at least {min_reps} replicates, got {paths.reps}")
    if rng is None:
        rng = np.random.default_rng(0)
    counts, lengths = unit_window_counts(paths)
    reps, W, K1 = counts.shape
    N = reps * W
    means = np.broadcast_to(rate * lengths[None, :], (reps, W))
    rows = []
    for r in range(K1):
        x = counts[:, :, r].ravel().astype(float)
        mean = x.mean()
        var = x.var(ddof=1)
        m4 = np.mean((x - mean) ** 4)
        chi2, df, chi2_p = poisson_chi2(counts[:, :, r], means)
        gaps = gap_pit(paths, r, rng, rate)
        if len(gaps):
            ks = sps.kstest(gaps, "uniform")
            ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
        else:
            ks_stat, ks_p = float("nan"), 1.0
        rows.append(RowFit(
            row=r, events=int(paths.increments[:, :, r].sum()), windows=N,
            mean=float(mean), mean_se=float(math.sqrt(var / N)),
            variance=float(var), variance_se=float(math.sqrt(max(m4 - var ** 2, 0.0) / N)),
            chi2=chi2, chi2_df=df, chi2_p=chi2_p, ks=ks_stat, ks_p=ks_p, gaps=len(gaps),
        ))
    covs = {}
    for r, s in combinations(range(K1), 2):
        x = counts[:, :, r].ravel().astype(float)
        y = counts[:, :, s].ravel().astype(float)
        prod = (x - x.mean()) * (y - y.mean())
        covs[f"{r},{s}"] = (float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(N)))
    return PoissonFitReport(rate, reps, rows, covs,
                            meta={"n": paths.n, "c": paths.c, "k": paths.k, "windows_per_rep": W})


# --------------------------------------------------------------------------
# Rescaled entries of the recording and insertion tableaux

@dataclass
class RescaledSets:
    points: List[np.ndarray]
    partial: bool = False

    def __getitem__(self, y):
        return self.points[y]

    def __len__(self):
        return len(self.points)


def _restrict(values, window):
    values = np.asarray(values, dtype=float)
    if window is None:
        return values
    lo, hi = window
    return values[(values >= lo) & (values <= hi)]


def rescaled_Q_sets(Q, n: int, k: int, window=None) -> RescaledSets:
    """Row ``y`` of ``Q`` mapped to ``{(Q[x, y] - n) / sqrt(n)}`` for ``y <= k``."""
    rows = Q.rows if isinstance(Q, Tableau) else list(Q)
    root = math.sqrt(n)
    pts = [_restrict((np.asarray(rows[y], dtype=float) - n) / root, window)
           if y < len(rows) else np.empty(0) for y in range(k + 1)]
    return RescaledSets(pts, partial=len(rows) < k + 1)


def rescaled_P_sets(P, w: float, n: int, k: int, window=None) -> RescaledSets:
    """Row ``y`` of ``P`` mapped to ``{sqrt(n) (P[x, y] - w)}`` for ``y <= k``."""
    if not 0 < w <= 1:
        raise ValueError(f"w must lie in (0, 1], got {w}")
    rows = P.rows if isinstance(P, Tableau) else list(P)
    root = math.sqrt(n)
    pts = []
    for y in range(k + 1):
        if y < len(rows):
            row = np.asarray(rows[y], dtype=float)
            pts.append(_restrict(root * (row[~np.isnan(row)] - w), window))
        else:
            pts.append(np.empty(0))
    return RescaledSets(pts, partial=len(rows) < k + 1)


def sample_q_sets(n: int, c: float, k: int, reps: int, rng) -> List[RescaledSets]:
    """Rescaled recording-tableau rows near ``n`` for ``reps`` growth runs.

    Entry ``n + i`` of row ``y`` is exactly a growth of row ``y`` at step
    ``n + i``, so the labels of the window give the points directly.
    """
    paths = counting_paths(n, c, k, reps, rng)
    root = math.sqrt(n)
    return [RescaledSets([paths.event_offsets(rep, y) / root for y in range(k + 1)])
            for rep in range(reps)]


def sample_p_rows(n: int, k: int, reps: int, rng):
    """Rows ``0..k`` of ``P`` for ``reps`` words of ``n`` uniform letters."""
    values, lengths = _kernels.bottom_rows(rng, reps, n, k, _kernels.row_capacity(n))
    return values, lengths


@dataclass
class GapReport:
    intensity: float
    window: tuple
    gaps: int
    mean_gap: float
    mean_gap_se: float
    ks: float
    ks_p: float
    points_per_rep: float
    max_point: float
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def predecessor_gaps(points, window: tuple) -> np.ndarray:
    """``x - (previous point)`` for every point ``x`` of ``points`` in ``window``.

    ``points`` must be the full (unrestricted) set so that predecessors
    outside the window are available; the first point has none and is
    skipped.  For a Poisson process these gaps are i.i.d. exponential,
    whereas gaps with both ends inside a finite window are biased short.
    """
    lo, hi = window
    pts = np.sort(np.asarray(points, dtype=float))
    if len(pts) < 2:
        return np.empty(0)
    right = pts[1:]
    keep = (right >= lo) & (right <= hi)
    return (right - pts[:-1])[keep]


def gap_report(point_sets: Sequence[np.ndarray], window: tuple, intensity: float = 1.0) -> GapReport:
    """Predecessor gaps of the points inside ``window``, pooled over replicates.

    The KS test compares them with Exponential(intensity).
    """
    lo, hi = window
    gaps, counts, top = [], [], -math.inf
    for pts in point_sets:
        pts = np.asarray(pts, dtype=float)
        inside = pts[(pts >= lo) & (pts <= hi)]
        counts.append(len(inside))
        if len(inside):
            top = max(top, float(inside.max()))
        gaps.append(predecessor_gaps(pts, window))
    g = np.concatenate(gaps) if gaps else np.empty(0)
    if len(g) > 1:
        ks = sps.kstest(g, "expon", args=(0, 1.0 / intensity))
        ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
        mean, se = float(g.mean()), float(g.std(ddof=1) / math.sqrt(len(g)))
    else:
        ks_stat, ks_p, mean, se = float("nan"), 1.0, float("nan"), float("nan")
    return GapReport(intensity, tuple(window), len(g), mean, se, ks_stat, ks_p,
                     float(np.mean(counts)) if counts else 0.0, top)


def count_correlation(sets: Sequence[RescaledSets], rows: tuple, window: tuple):
    """Correlation of the window point counts of two rows across replicates.

    Returns ``(correlation, standard_error)``, the latter ``1/sqrt(reps)``.
    """
    lo, hi = window
    r, s = rows
    x = np.array([np.count_nonzero((p[r] >= lo) & (p[r] <= hi)) for p in sets], dtype=float)
    y = np.array([np.count_nonzero((p[s] >= lo) & (p[s] <= hi)) for p in sets], dtype=float)
    if x.std() == 0 or y.std() == 0:
        return 0.0, 1.0 / math.sqrt(len(sets))
    return float(np.corrcoef(x, y)[0, 1]), 1.0 / math.sqrt(len(sets))


# --------------------------------------------------------------------------
# The independence experiment

def encode_labels(codes: np.ndarray, k: int) -> np.ndarray:
    """Map label tuples (codes ``0..k+1``) to integers in base ``k + 2``."""
    codes = np.asarray(codes, dtype=np.int64)
    base = (k + 2) ** np.arange(codes.shape[1])
    return codes @ base


def vbar_codes(n: int, ell: int, k: int, reps: int, rng) -> np.ndarray:
    """Independent labels: row ``r <= k`` with probability ``1/sqrt n`` each."""
    u = rng.random((reps, ell)) * math.sqrt(n)
    return np.where(u < k + 1, u.astype(np.int64), k + 1)


def _coarse(lengths: np.ndarray, N: int, R: int) -> np.ndarray:
    width = max(1, round(N ** (1 / 6)))
    z = np.floor_divide(lengths - round(2 * math.sqrt(N)), width)
    return np.clip(z, -R, R) + R


def _support_size(ell, k, mode, coarse_range):
    support = (k + 2) ** ell
    if mode == "coarse":
        support *= (2 * coarse_range + 1) ** (k + 1)
    elif mode != "marginal":
        raise ValueError(f"unknown mode {mode!r}")
    return support


def rsk_label_counts(n: int, ell: int, k: int, reps: int, rng, mode: str = "marginal",
                     coarse_range: int = 2) -> np.ndarray:
    """Histogram of the encoded growth vector of RSK on uniform letters."""
    support = _support_size(ell, k, mode, coarse_range)
    N = n + ell
    codes, lengths = _kernels.grow_labels(rng, reps, n, ell, k, _kernels.row_capacity(N))
    v = encode_labels(codes, k)
    if mode == "coarse":
        base = (2 * coarse_range + 1) ** np.arange(k + 1)
        v = v + (k + 2) ** ell * (_coarse(lengths, N, coarse_range) @ base)
    return np.bincount(v, minlength=support)


def vbar_label_counts(n: int, ell: int, k: int, reps: int, rng, mode: str = "marginal",
                      coarse_range: int = 2) -> np.ndarray:
    """Histogram of the independent-label counterpart.

    In coarse mode the diagram coordinate is an independent Plancherel
    diagram of size ``n + ell``, sampled as an RSK shape.
    """
    support = _support_size(ell, k, mode, coarse_range)
    v = encode_labels(vbar_codes(n, ell, k, reps, rng), k)
    if mode == "coarse":
        N = n + ell
        _, lengths = _kernels.bottom_rows(rng, reps, N, k, _kernels.row_capacity(N))
        base = (2 * coarse_range + 1) ** np.arange(k + 1)
        v = v + (k + 2) ** ell * (_coarse(lengths, N, coarse_range) @ base)
    return np.bincount(v, minlength=support)


def vbar_marginal_law(n: int, ell: int, k: int) -> np.ndarray:
    """Exact law of the encoded independent labels."""
    p = 1 / math.sqrt(n)
    single = np.array([p] * (k + 1) + [1 - (k + 1) * p])
    law = np.ones(1)
    for _ in range(ell):
        law = np.outer(single, law).ravel()
    return law


def independence_from_counts(cv, cb, cb2, n: int, ell: int, k: int, rng, mode: str = "marginal",
                             n_boot: int = 200, level: float = 0.95) -> TVDEstimate:
    """TVD estimate from the three histograms of :func:`independence_experiment`."""
    value, ci = tvd_with_ci(cv, cb, rng, n_boot, level)
    base_emp, base_ci = tvd_with_ci(cb, cb2, rng, n_boot, level)
    reps = int(np.sum(cv))
    baseline = None
    if mode == "marginal":
        baseline = expected_plugin_tvd(vbar_marginal_law(n, ell, k), reps, int(np.sum(cb)))
    return TVDEstimate(value, ci, len(cv), reps, baseline, base_emp, base_ci,
                       meta={"n": n, "ell": ell, "k": k, "mode": mode, "level": level})


def independence_experiment(n: int, ell: int, k: int, reps: int, rng, mode: str = "marginal",
                            coarse_range: int = 2, n_boot: int = 200,
                            level: float = 0.95) -> TVDEstimate:
    """Plug-in TVD between RSK growth labels and independent labels.

    ``mode="marginal"`` compares the label vectors only.  ``mode="coarse"``
    appends the final bottom row lengths, centred at ``2 sqrt(n + ell)``,
    binned by ``(n + ell)^(1/6)`` and clipped to ``+-coarse_range`` bins.
    The estimate comes with a bootstrap interval and the same-law bias
    baseline (analytic and measured with the same number of replicates).
    """
    if n < (k + 1) ** 2:
        raise ValueError(f"need n >= (k+1)^2 = {(k + 1) ** 2}")
    support = _support_size(ell, k, mode, coarse_range)
    if reps < 100 * support:
        raise CapacityError(f"reps={reps} below 100 x support size {support}")
    cv = rsk_label_counts(n, ell, k, reps, rng, mode, coarse_range)
    cb = vbar_label_counts(n, ell, k, reps, rng, mode, coarse_range)
    cb2 = vbar_label_counts(n, ell, k, reps, rng, mode, coarse_range)
    return independence_from_counts(cv, cb, cb2, n, ell, k, rng, mode, n_boot, level)


# --------------------------------------------------------------------------
# Largest bottom-row entry and order statistics

@dataclass
class KSReport:
    n: int
    reps: int
    mean: float
    mean_se: float
    ks: float
    ks_p: float
    minimum: float
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def exp_tail_samples(n: int, reps: int, rng) -> np.ndarray:
    """``sqrt(n) (1 - last entry of the bottom row of P)`` per replicate."""
    values, lengths = _kernels.bottom_rows(rng, reps, n, 0, _kernels.row_capacity(n))
    last = values[np.arange(reps), 0, lengths[:, 0] - 1]
    return math.sqrt(n) * (1.0 - last)


def exp_tail_test(n: int, reps: int, rng) -> KSReport:
    """KS test of the rescaled largest bottom-row entry against Exp(1)."""
    if n < 100:
        raise ValueError("n must be at least 100")
    x = exp_tail_samples(n, reps, rng)
    return ks_exponential(x, n)


def ks_exponential(x: np.ndarray, n: int = 0, rate: float = 1.0) -> KSReport:
    x = np.asarray(x, dtype=float)
    ks = sps.kstest(x, "expon", args=(0, 1.0 / rate))
    return KSReport(n, len(x), float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))),
                    float(ks.statistic), float(ks.pvalue), float(x.min()))


@dataclass
class OrderStatReport:
    n: int
    w: float
    reps: int
    half_width: int
    max_abs_deviation: np.ndarray   # per replicate, over the window
    center: np.ndarray              # (xi_(m) - w) sqrt(n), per replicate

    @property
    def p95(self) -> float:
        return float(np.percentile(self.max_abs_deviation, 95))


def order_stat_diag(n: int, w: float, rng, reps: int = 200, width: float = 3.0) -> OrderStatReport:
    """How far ``sqrt(n)(xi_(j) - w)`` is from ``(j - m)/sqrt(n)`` near ``m``.

    ``m`` counts letters below ``w``; ``j`` ranges over
    ``|j - m| <= width sqrt(n)`` (1-based ranks, clipped to ``1..n``).
    """
    if n < 100:
        raise ValueError("n must be at least 100")
    root = math.sqrt(n)
    h = int(width * root)
    dev = np.empty(reps)
    center = np.full(reps, np.nan)
    for rep in range(reps):
        xs = np.sort(rng.random(n))
        m = int(np.searchsorted(xs, w))
        j = np.arange(max(1, m - h), min(n, m + h) + 1)
        d = (xs[j - 1] - w) * root - (j - m) / root
        dev[rep] = np.abs(d).max()
        if m >= 1:
            center[rep] = (xs[m - 1] - w) * root
    return OrderStatReport(n, w, reps, h, dev, center)
