import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rskpoisson import (DualCorner, ParticleConfiguration, SpaceTimePoint, check_rsk_equivalence,
                        hammersley_step, rsk, run_line, run_multiline)
from rskpoisson.hammersley import CREATE, JUMP, read_points_csv, write_trace_csv

# drawing with initial particles {2, 3, 7} and four input points
FIG_INITIAL = [2, 3, 7]
FIG_POINTS = [(5, 2), (1, 4), (6, 5), (4, 6)]

words = st.lists(st.floats(0, 1, allow_nan=False), unique=True, max_size=60)


def test_step_examples():
    cfg, ev, corner = hammersley_step(ParticleConfiguration([2, 3, 7]), (1, 4))
    assert cfg == [1, 3, 7] and ev.kind == JUMP and corner == DualCorner(2, 4)
    cfg, ev, corner = hammersley_step(ParticleConfiguration(), (0.3, 1))
    assert cfg == [0.3] and ev.kind == CREATE and corner is None
    cfg, ev, corner = hammersley_step(ParticleConfiguration([3]), (5, 1))
    assert cfg == [3, 5] and corner is None
    with pytest.raises(ValueError):
        hammersley_step(ParticleConfiguration([3]), (3, 1))


def test_figure_bottom_line():
    final, corners, trace = run_line(FIG_POINTS, ParticleConfiguration(FIG_INITIAL))
    assert sorted(corners) == sorted([DualCorner(7, 2), DualCorner(2, 4), DualCorner(5, 6)])
    assert corners == [DualCorner(7, 2), DualCorner(2, 4), DualCorner(5, 6)]
    assert final == [1, 3, 4, 6]
    assert [e.kind for e in trace] == [JUMP, JUMP, CREATE, JUMP]


def test_figure_second_line():
    init = [ParticleConfiguration(FIG_INITIAL), ParticleConfiguration([4.5])]
    state = run_multiline(FIG_POINTS, 1, init)
    trace = state.traces[1]
    assert [(e.t, e.kind, e.x_old, e.x_new) for e in trace] == [
        (2, CREATE, None, 7), (4, JUMP, 4.5, 2), (6, JUMP, 7, 5)]
    assert state.lines[1] == [2, 5]


def test_line_examples():
    final, corners, trace = run_line([], ParticleConfiguration([1, 2]))
    assert final == [1, 2] and corners == [] and trace == []
    final, corners, _ = run_line([(3, 1), (1, 2), (2, 3)])
    assert final == [1, 2] and corners == [DualCorner(3, 2)]
    with pytest.raises(ValueError):
        run_line([(1, 2), (2, 2)])
    with pytest.raises(ValueError):
        run_multiline([(1, 1)], 1, [ParticleConfiguration()])


def test_multiline_small_word():
    pts = [(3, 1), (1, 2), (2, 3)]
    state = run_multiline(pts, 1)
    assert state.lines[1] == [3]
    k0 = run_multiline(pts, 0)
    assert k0.lines[0] == run_line(pts)[0]
    rep = check_rsk_equivalence([3, 1, 2], 2)
    assert rep.passed and rep.final_lines == [[1, 2], [3], []]
    assert check_rsk_equivalence([0.5], 3).passed


@settings(max_examples=150, deadline=None)
@given(words, st.integers(0, 4))
def test_lines_follow_tableau_rows(word, k):
    rep = check_rsk_equivalence(word, k)
    assert rep.passed and rep.first_divergence is None
    P, _, shape = rsk(word)
    for y in range(k + 1):
        assert rep.final_lines[y] == (P.rows[y] if y < len(shape) else [])


@settings(max_examples=100, deadline=None)
@given(words, st.integers(0, 3))
def test_line_invariants(word, k):
    pts = [SpaceTimePoint(a, t) for t, a in enumerate(word, start=1)]
    state = run_multiline(pts, k)
    feed = len(pts)
    for y in range(k + 1):
        trace = state.traces[y]
        creations = sum(e.kind == CREATE for e in trace)
        assert len(trace) == feed
        assert len(state.lines[y]) == creations
        assert state.lines[y].positions == sorted(set(state.lines[y].positions))
        feed -= creations
    assert run_multiline(pts, k).traces == state.traces


def test_mismatch_is_reported(monkeypatch):
    import rskpoisson.hammersley as ham
    real = ham.run_multiline

    def corrupted(points, k, initial=None):
        state = real(points, k, initial)
        ev = state.traces[1][-1]
        state.traces[1][-1] = ev._replace(x_new=ev.x_new + 100)
        return state

    monkeypatch.setattr(ham, "run_multiline", corrupted)
    rep = ham.check_rsk_equivalence([3, 1, 2, 0.5], 1)
    assert not rep.passed
    assert rep.line_passed == [True, False]
    assert rep.first_divergence == (4, 1)


def test_csv_roundtrip(tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("x,t\n5,2\n4,6\n1,4\n6,5\n")
    points = read_points_csv(pts)
    assert [p.t for p in points] == [2, 4, 5, 6]
    state = run_multiline(points, 1, [ParticleConfiguration(FIG_INITIAL), ParticleConfiguration()])
    out = tmp_path / "trace.csv"
    state.export_trace_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "line,t,kind,x_old,x_new"
    assert len(lines) == 1 + 4 + 3
    write_trace_csv(out, [])
    assert out.read_text().strip() == "line,t,kind,x_old,x_new"


def test_random_words_against_rsk():
    rng = np.random.default_rng(2)
    for _ in range(30):
        w = rng.random(int(rng.integers(1, 120))).tolist()
        assert check_rsk_equivalence(w, 3).passed
