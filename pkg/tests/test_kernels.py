import numpy as np
import pytest

from rskpoisson import _kernels
from rskpoisson.tableau import _insert_inplace


def python_labels(words, k):
    labels, finals = [], []
    for w in words:
        rows, lab = [], []
        for a in w:
            _, y = _insert_inplace(rows, a, k + 1)
            lab.append(k + 1 if y is None else y)
        labels.append(lab)
        finals.append(rows)
    return np.array(labels), finals


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_cascade_matches_python(k):
    words = np.random.default_rng(k).random((40, 400))
    labels, values = _kernels.cascade_words(words, k, 120)
    ref_labels, ref_rows = python_labels(words, k)
    assert np.array_equal(labels, ref_labels)
    for rep, rows in enumerate(ref_rows):
        for r in range(k + 1):
            got = values[rep, r]
            got = got[~np.isnan(got)].tolist()
            assert got == (rows[r] if r < len(rows) else [])


def test_grow_labels_replays_generator():
    labels, lengths = _kernels.grow_labels(np.random.default_rng(9), 3, 200, 50, 1, 100)
    rng = np.random.default_rng(9)
    words = rng.random((3, 250))
    ref, rows = python_labels(words, 1)
    assert np.array_equal(labels, ref[:, 200:])
    assert lengths.tolist() == [[len(r[0]), len(r[1])] for r in rows]


def test_bottom_rows_and_shapes():
    vals, lens = _kernels.bottom_rows(np.random.default_rng(4), 2, 300, 2, 100)
    shp = _kernels.shapes(np.random.default_rng(4), 2, 300, 2, 100)
    assert np.array_equal(lens, shp)
    for rep in range(2):
        row0 = vals[rep, 0, :lens[rep, 0]]
        assert np.all(np.diff(row0) > 0)
        assert np.all(np.isnan(vals[rep, 0, lens[rep, 0]:]))


def test_capacity_overflow_raises():
    with pytest.raises(ValueError):
        _kernels.cascade_words(np.arange(10, dtype=float)[None, :], 0, 5)


def test_row_capacity_covers_typical_rows():
    assert _kernels.row_capacity(10000) > 2 * 100 + 60
