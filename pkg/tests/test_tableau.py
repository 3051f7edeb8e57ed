import itertools
import math
from bisect import bisect_left

import pytest
from hypothesis import given, settings, strategies as st

from rskpoisson import (INF, DuplicateEntryError, RecordingTableau, Tableau, row_insert, rsk,
                        schensted_insert, truncated_insert, validate_diagram)

FIG_T = Tableau([[16, 37, 41, 82], [23, 53, 70], [74, 99]])

distinct_words = st.lists(st.integers(-10 ** 6, 10 ** 6), unique=True, max_size=40)


def lis_length(word):
    # patience sorting, independent of the insertion code
    piles = []
    for a in word:
        i = bisect_left(piles, a)
        if i == len(piles):
            piles.append(a)
        else:
            piles[i] = a
    return len(piles)


def test_row_insert_examples():
    assert row_insert([2, 5, 9], 6) == ([2, 5, 6], 9)
    assert row_insert([2, 5, 9], 10) == ([2, 5, 9, 10], None)
    assert row_insert([], 3) == ([3], None)
    with pytest.raises(DuplicateEntryError):
        row_insert([2, 5, 9], 5)


def test_figure_insertion_route():
    new, route = schensted_insert(FIG_T, 18)
    assert [s.value for s in route] == [18, 37, 53, 74]
    assert [(s.row, s.column) for s in route] == [(0, 1), (1, 1), (2, 0), (3, 0)]
    # the printed output has 58 in box (0, 2); 53 is what the route carries there
    assert new.rows == [[16, 18, 41, 82], [23, 37, 70], [53, 99], [74]]
    assert FIG_T.rows[0][1] == 37  # input untouched
    assert new[0, 2] == 53


def test_tableau_validation():
    assert FIG_T.is_valid()
    assert Tableau([[1, 3], [2]]).is_valid()
    assert not Tableau([[2, 3], [1, 4, 5]]).is_valid()
    assert not Tableau([[1, 2], [1]]).is_valid()
    with pytest.raises(ValueError):
        schensted_insert(Tableau([[3, 1]]), 2)
    with pytest.raises(ValueError):
        validate_diagram([1, 2])
    assert validate_diagram([3, 1, 1]) == (3, 1, 1)


def test_rsk_small_word():
    P, Q, shape = rsk([3, 1, 2])
    assert shape == (2, 1)
    assert P.rows == [[1, 2], [3]]
    assert Q.rows == [[1, 3], [2]]
    assert rsk([]) == (Tableau(), RecordingTableau(), ())
    with pytest.raises(DuplicateEntryError):
        rsk([1, 2, 1])


@pytest.mark.parametrize("n", range(1, 7))
def test_rsk_is_injective_on_permutations(n):
    seen = set()
    for perm in itertools.permutations(range(n)):
        P, Q, _ = rsk(perm)
        assert P.is_valid() and Q.is_standard()
        seen.add((hash(P), hash(Q), tuple(map(tuple, P.rows)), tuple(map(tuple, Q.rows))))
    assert len(seen) == math.factorial(n)


@settings(max_examples=200, deadline=None)
@given(distinct_words)
def test_rsk_invariants(word):
    P, Q, shape = rsk(word)
    assert P.shape == Q.shape == shape
    assert sum(shape) == len(word)
    assert P.is_valid() and Q.is_standard()
    assert sorted(P.entries()) == sorted(word)
    assert (shape[0] if shape else 0) == lis_length(word)


@settings(max_examples=200, deadline=None)
@given(distinct_words, st.integers(0, 4))
def test_truncation_matches_full_insertion(word, k):
    full, rows = Tableau(), []
    for a in word:
        before = full.shape
        full, _ = schensted_insert(full, a)
        rows, label = truncated_insert(rows, a, k)
        assert rows == full.rows[:k + 1]
        grown = next(y for y, m in enumerate(full.shape) if y >= len(before) or m > before[y])
        assert label == (grown if grown <= k else INF)


def test_truncated_insert_errors_and_inplace():
    with pytest.raises(ValueError):
        truncated_insert([[1], [2], [3]], 0.5, 1)
    with pytest.raises(ValueError):
        truncated_insert([], 1, -1)
    rows = [[1, 4], [5]]
    out, label = truncated_insert(rows, 2, 1, inplace=True)
    assert out is rows and rows == [[1, 2], [4]] and label == INF
    assert truncated_insert([], 3, 0) == ([[3]], 0)
