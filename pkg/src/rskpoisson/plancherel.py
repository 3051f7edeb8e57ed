"""Exact Plancherel measure computations and Plancherel growth samplers."""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .tableau import INF, YoungDiagram, _insert_inplace, validate_diagram

ENUM_LIMIT = 50


class CapacityError(ValueError):
    """Requested size exceeds the configured enumeration or sample limit."""


def partitions(n: int) -> Iterator[YoungDiagram]:
    """All partitions of ``n`` as weakly decreasing tuples, largest first."""
    if n == 0:
        yield ()
        return

    def rec(remaining, largest, prefix):
        if remaining == 0:
            yield tuple(prefix)
            return
        for part in range(min(remaining, largest), 0, -1):
            prefix.append(part)
            yield from rec(remaining - part, part, prefix)
            prefix.pop()

    yield from rec(n, n, [])


def conjugate(shape: YoungDiagram) -> YoungDiagram:
    if not shape:
        return ()
    return tuple(sum(1 for row in shape if row > x) for x in range(shape[0]))


def hook_lengths(shape: YoungDiagram) -> List[List[int]]:
    cols = conjugate(shape)
    return [[shape[y] - x + cols[x] - y - 1 for x in range(shape[y])]
            for y in range(len(shape))]


@lru_cache(maxsize=1 << 19)
def dimension(shape: YoungDiagram) -> int:
    """Number of standard Young tableaux of ``shape`` (hook length formula)."""
    shape = validate_diagram(shape)
    prod = 1
    for row in hook_lengths(shape):
        for h in row:
            prod *= h
    return math.factorial(sum(shape)) // prod


def addable_rows(shape: YoungDiagram) -> List[int]:
    """Rows where a single box can be added (the last entry is a new row)."""
    return [r for r in range(len(shape) + 1)
            if r == 0 or (shape[r - 1] > (shape[r] if r < len(shape) else 0))]


def add_box(shape: YoungDiagram, r: int) -> YoungDiagram:
    if r == len(shape):
        return tuple(shape) + (1,)
    return tuple(shape[:r]) + (shape[r] + 1,) + tuple(shape[r + 1:])


@dataclass
class ExactMeasure:
    support: List[YoungDiagram]
    probabilities: List[Fraction]

    def as_dict(self) -> Dict[YoungDiagram, Fraction]:
        return dict(zip(self.support, self.probabilities))


def _check_limit(n, limit):
    if n > limit:
        raise CapacityError(f"n={n} exceeds enumeration limit {limit}")


def plancherel_pmf(n: int, limit: int = ENUM_LIMIT) -> ExactMeasure:
    """Plancherel measure on diagrams with ``n`` boxes, as exact rationals."""
    _check_limit(n, limit)
    support = list(partitions(n))
    nfact = math.factorial(n)
    probs = [Fraction(dimension(lam) ** 2, nfact) for lam in support]
    assert sum(probs) == 1
    return ExactMeasure(support, probs)


def _transition_ratio(shape, cols, r, one):
    # d(lambda) / ((n+1) d(mu)) = H(mu) / H(lambda); only hooks in the row and
    # column of the new box change, each growing by one.
    c = shape[r] if r < len(shape) else 0
    ratio = one
    for x in range(c):
        h = shape[r] - x + cols[x] - r - 1
        ratio = ratio * h / (h + 1)
    for y in range(r):
        h = shape[y] - c + r - y - 1
        ratio = ratio * h / (h + 1)
    return ratio


def transition_probabilities(mu: YoungDiagram, exact: Optional[bool] = None) -> Dict[YoungDiagram, object]:
    """Plancherel transition law out of ``mu``.

    Exact rationals (checked to sum to one) by default up to the enumeration
    limit, doubles above it.
    """
    mu = validate_diagram(mu)
    if exact is None:
        exact = sum(mu) <= ENUM_LIMIT
    one = Fraction(1) if exact else 1.0
    cols = conjugate(mu)
    out = {add_box(mu, r): _transition_ratio(mu, cols, r, one) for r in addable_rows(mu)}
    if exact:
        assert sum(out.values()) == 1, "transition probabilities do not sum to 1"
    return out


def transition_step(mu: YoungDiagram, rng) -> YoungDiagram:
    """One step of the Plancherel growth process from ``mu``."""
    probs = transition_probabilities(mu)
    u = rng.random()
    acc = 0.0
    lam = None
    for lam, p in probs.items():
        acc += float(p)
        if u < acc:
            return lam
    return lam


def sample_plancherel(n: int, rng) -> YoungDiagram:
    """Plancherel-distributed diagram built from ``n`` transition steps."""
    lam: YoungDiagram = ()
    for _ in range(n):
        lam = transition_step(lam, rng)
    return lam


@dataclass
class GrowthObservation:
    """Row labels of steps ``base_n+1 .. base_n+ell`` plus the final diagram.

    Labels lie in ``{0, ..., k, INF}``; ``terminal`` is ``None`` when only
    the labels were sampled.
    """
    labels: Tuple
    terminal: Optional[YoungDiagram]
    base_n: int
    k: int
    meta: dict = field(default_factory=dict)


def grow_rsk(n: int, ell: int, k: int, rng, terminal: bool = True) -> GrowthObservation:
    """Sample the growth vector by RSK insertion of uniform letters.

    All ``n + ell`` letters come from ``rng`` in order.  Without a terminal
    diagram only the bottom ``k + 1`` rows are tracked.
    """
    if n < 0 or ell < 0 or k < 0:
        raise ValueError("n, ell and k must be non-negative")
    rows: List[list] = []
    max_rows = None if terminal else k + 1
    for _ in range(n):
        _insert_inplace(rows, rng.random(), max_rows)
    labels = []
    for _ in range(ell):
        _, y = _insert_inplace(rows, rng.random(), max_rows)
        labels.append(y if y is not None and y <= k else INF)
    final = tuple(len(r) for r in rows) if terminal else None
    return GrowthObservation(tuple(labels), final, n, k)


def vbar_label_law(n: int, k: int) -> Dict[object, float]:
    """Law of one independent label: ``1/sqrt(n)`` per row ``0..k``."""
    if n < (k + 1) ** 2:
        raise ValueError(f"need n >= (k+1)^2 = {(k + 1) ** 2}, got n={n}")
    p = 1.0 / math.sqrt(n)
    law = {r: p for r in range(k + 1)}
    law[INF] = max(0.0, 1.0 - (k + 1) * p)
    return law


def sample_vbar(n: int, ell: int, k: int, rng, terminal: bool = True) -> GrowthObservation:
    """Independent-coordinates counterpart of :func:`grow_rsk`."""
    vbar_label_law(n, k)
    root = math.sqrt(n)
    labels = []
    for _ in range(ell):
        u = rng.random() * root
        labels.append(int(u) if u < k + 1 else INF)
    final = sample_plancherel(n + ell, rng) if terminal else None
    return GrowthObservation(tuple(labels), final, n, k)


def exact_row_growth_prob(n: int, r: int, limit: int = ENUM_LIMIT) -> Fraction:
    """Probability that step ``n`` of the growth process adds a box to row ``r``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_limit(n, limit)
    total = 0
    for mu in partitions(n - 1):
        if r in addable_rows(mu):
            total += dimension(mu) * dimension(add_box(mu, r))
    return Fraction(total, math.factorial(n))


def row_growth_table(K: int, n_max: int, limit: int = ENUM_LIMIT) -> List[List[Fraction]]:
    """``P(E_r^(n))`` for ``r = 0..K`` and ``n = 1..n_max`` in one enumeration pass."""
    _check_limit(n_max, limit)
    out = []
    for n in range(1, n_max + 1):
        totals = [0] * (K + 1)
        for mu in partitions(n - 1):
            d_mu = dimension(mu)
            for r in addable_rows(mu):
                if r <= K:
                    totals[r] += d_mu * dimension(add_box(mu, r))
        nfact = math.factorial(n)
        out.append([Fraction(t, nfact) for t in totals])
    return out


def s_table(K: int, n_max: int, limit: int = ENUM_LIMIT) -> List[Fraction]:
    """``s_n = P(new box in rows 0..K)`` for ``n = 1..n_max``, exact."""
    return [sum(row, Fraction(0)) for row in row_growth_table(K, n_max, limit)]


def growth_table(rows: List[int], n_max: int, limit: int = ENUM_LIMIT):
    """Records ``(n, r, P(E_r^(n)))`` for the CSV export."""
    return [(n, r, exact_row_growth_prob(n, r, limit))
            for n in range(1, n_max + 1) for r in rows]


def write_exact_csv(path, records) -> None:
    """Write ``(n, r, Fraction)`` records as ``n,r,numerator,denominator,value``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "r", "numerator", "denominator", "value"])
        for n, r, q in records:
            writer.writerow([n, r, q.numerator, q.denominator, repr(float(q))])


def sample_rsk_shapes(n: int, reps: int, rng) -> List[YoungDiagram]:
    """RSK shapes of ``reps`` words of ``n`` uniform letters (compiled path)."""
    from . import _kernels
    if n == 0:
        return [()] * reps
    lengths = _kernels.shapes(rng, reps, n, n - 1, n + 1)
    return [tuple(int(x) for x in row if x) for row in lengths]


def shape_counts(n: int, reps: int, rng) -> Dict[YoungDiagram, int]:
    """Histogram of RSK shapes over ``reps`` uniform words of length ``n``."""
    from . import _kernels
    if n == 0:
        return {(): reps}
    lengths = _kernels.shapes(rng, reps, n, n - 1, n + 1)
    uniq, counts = np.unique(lengths, axis=0, return_counts=True)
    return {tuple(int(x) for x in row if x): int(c) for row, c in zip(uniq, counts)}
