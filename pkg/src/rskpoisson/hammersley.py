"""Hammersley particle dynamics and its multi-line cascade.

A space-time point ``(x, t)`` either pulls the first particle to the right
of ``x`` leftwards onto ``x`` (a jump, which emits the dual corner
``(old position, t)``) or creates a new particle at ``x``.  Line ``y + 1`` is
driven by the dual corners of line ``y``; with the points ``(w_i, i)`` of a
word, line ``y`` follows row ``y`` of the insertion tableau.
"""

import csv
from bisect import bisect_right
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from .tableau import _insert_inplace

SpaceTimePoint = namedtuple("SpaceTimePoint", ["x", "t"])
DualCorner = namedtuple("DualCorner", ["x", "t"])
Event = namedtuple("Event", ["t", "kind", "x_old", "x_new"])

JUMP = "jump"
CREATE = "create"


class ParticleConfiguration:
    """Strictly increasing particle positions on the line."""

    def __init__(self, positions: Iterable[float] = ()):
        self.positions = sorted(positions)
        if any(a == b for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("particle positions must be distinct")

    def __len__(self):
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def __eq__(self, other):
        if isinstance(other, ParticleConfiguration):
            other = other.positions
        return self.positions == list(other)

    def __repr__(self):
        return f"ParticleConfiguration({self.positions!r})"

    def copy(self):
        new = ParticleConfiguration.__new__(ParticleConfiguration)
        new.positions = list(self.positions)
        return new

    def apply(self, p: SpaceTimePoint):
        """Process one input point in place; returns ``(event, corner)``."""
        pos = self.positions
        i = bisect_right(pos, p.x)
        if i > 0 and pos[i - 1] == p.x:
            raise ValueError(f"input position {p.x!r} coincides with a particle")
        if i == len(pos):
            pos.append(p.x)
            return Event(p.t, CREATE, None, p.x), None
        old = pos[i]
        pos[i] = p.x
        return Event(p.t, JUMP, old, p.x), DualCorner(old, p.t)


def hammersley_step(config: ParticleConfiguration, p: SpaceTimePoint):
    """Functional single step: ``(config', event, corner or None)``."""
    new = config.copy()
    event, corner = new.apply(SpaceTimePoint(*p))
    return new, event, corner


def _check_times(points):
    for a, b in zip(points, points[1:]):
        if not a.t < b.t:
            raise ValueError("input points must be sorted strictly by time")


def run_line(points: Sequence, initial: Optional[ParticleConfiguration] = None):
    """Fold the dynamics over time-sorted ``points``.

    Returns ``(final configuration, dual corners, event trace)``.
    """
    points = [SpaceTimePoint(*p) for p in points]
    _check_times(points)
    config = ParticleConfiguration() if initial is None else initial.copy()
    corners, trace = [], []
    for p in points:
        event, corner = config.apply(p)
        trace.append(event)
        if corner is not None:
            corners.append(corner)
    return config, corners, trace


@dataclass
class MultiLineState:
    lines: List[ParticleConfiguration]
    traces: List[List[Event]] = field(default_factory=list)

    def export_trace_csv(self, path) -> None:
        write_trace_csv(path, self.traces)


def run_multiline(points: Sequence, k: int, initial: Optional[Sequence] = None) -> MultiLineState:
    """Lines ``0..k`` of the multi-line process driven by ``points``."""
    if initial is None:
        initial = [ParticleConfiguration() for _ in range(k + 1)]
    if len(initial) != k + 1:
        raise ValueError(f"expected {k + 1} initial lines, got {len(initial)}")
    lines, traces = [], []
    feed = list(points)
    for y in range(k + 1):
        final, corners, trace = run_line(feed, initial[y])
        lines.append(final)
        traces.append(trace)
        feed = corners
    return MultiLineState(lines, traces)


@dataclass
class EquivalenceReport:
    passed: bool
    line_passed: List[bool]
    first_divergence: Optional[tuple] = None  # (time index, line)
    final_lines: List[list] = field(default_factory=list)


def _replay(positions: list, ev: Event) -> None:
    if ev.kind == CREATE:
        positions.append(ev.x_new)
    else:
        positions[bisect_right(positions, ev.x_old) - 1] = ev.x_new


def check_rsk_equivalence(word: Sequence, k: int) -> EquivalenceReport:
    """Compare lines ``0..k`` with tableau rows ``0..k`` after every letter.

    The multi-line process is run once on the points ``(w_i, i)``; its
    per-line traces are then replayed time step by time step alongside
    ordinary Schensted insertion of the same letters.
    """
    state = run_multiline([SpaceTimePoint(a, t) for t, a in enumerate(word, start=1)], k)
    replay = [[] for _ in range(k + 1)]
    cursor = [0] * (k + 1)
    rows: List[list] = []
    line_ok = [True] * (k + 1)
    first = None
    for t, a in enumerate(word, start=1):
        _insert_inplace(rows, a)
        for y in range(k + 1):
            trace = state.traces[y]
            while cursor[y] < len(trace) and trace[cursor[y]].t <= t:
                _replay(replay[y], trace[cursor[y]])
                cursor[y] += 1
            row = rows[y] if y < len(rows) else []
            if replay[y] != row:
                if first is None:
                    first = (t, y)
                line_ok[y] = False
    return EquivalenceReport(all(line_ok), line_ok, first,
                             [list(line.positions) for line in state.lines])


def read_points_csv(path) -> List[SpaceTimePoint]:
    """Read ``x,t`` rows (header optional) sorted by time."""
    points = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                points.append(SpaceTimePoint(float(row[0]), float(row[1])))
            except ValueError:
                if points:
                    raise
    return sorted(points, key=lambda p: p.t)


def write_trace_csv(path, traces: Sequence[Sequence[Event]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["line", "t", "kind", "x_old", "x_new"])
        for y, trace in enumerate(traces):
            for ev in trace:
                writer.writerow([y, ev.t, ev.kind,
                                 "" if ev.x_old is None else ev.x_old, ev.x_new])
