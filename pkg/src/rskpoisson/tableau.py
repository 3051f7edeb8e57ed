"""Schensted row insertion and the Robinson-Schensted correspondence.

Coordinates follow the French convention: row 0 is the bottom row and
``T[x, y]`` is the entry in column ``x`` of row ``y``.  Entries may be any
totally ordered numbers (ints for exact small examples, floats for random
words); they must be pairwise distinct.
"""

from bisect import bisect_right
from collections import namedtuple
from typing import List, Optional, Sequence, Tuple

import math

YoungDiagram = Tuple[int, ...]

# Row label meaning "the new box appeared above the tracked rows".
INF = math.inf

RouteStep = namedtuple("RouteStep", ["row", "column", "value"])


class DuplicateEntryError(ValueError):
    """Raised when a letter equal to an existing entry is inserted."""


def validate_diagram(rows: Sequence[int]) -> YoungDiagram:
    rows = tuple(int(r) for r in rows)
    if any(r <= 0 for r in rows):
        raise ValueError(f"row lengths must be positive: {rows}")
    if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
        raise ValueError(f"row lengths must be weakly decreasing: {rows}")
    return rows


def row_insert(row: Sequence, a) -> Tuple[list, Optional[object]]:
    """Insert ``a`` into one sorted row.

    The leftmost entry strictly bigger than ``a`` is replaced and returned
    as the bumped value; otherwise ``a`` is appended and ``None`` returned.
    """
    new_row = list(row)
    pos = bisect_right(new_row, a)
    if pos > 0 and new_row[pos - 1] == a:
        raise DuplicateEntryError(f"entry {a!r} already present in row")
    if pos == len(new_row):
        new_row.append(a)
        return new_row, None
    bumped = new_row[pos]
    new_row[pos] = a
    return new_row, bumped


def _insert_inplace(rows: List[list], a, max_rows: Optional[int] = None):
    """Cascade ``a`` through ``rows`` in place.

    Returns ``(route, final_row)``; ``final_row`` is the row in which a new
    box appeared, or ``None`` when the cascade left the first ``max_rows``
    rows (the value bumped out of the last tracked row is dropped).
    """
    route = []
    y = 0
    while True:
        if max_rows is not None and y >= max_rows:
            return route, None
        if y == len(rows):
            rows.append([a])
            route.append(RouteStep(y, 0, a))
            return route, y
        row = rows[y]
        pos = bisect_right(row, a)
        if pos > 0 and row[pos - 1] == a:
            raise DuplicateEntryError(f"entry {a!r} already present in row {y}")
        route.append(RouteStep(y, pos, a))
        if pos == len(row):
            row.append(a)
            return route, y
        a, row[pos] = row[pos], a
        y += 1


class Tableau:
    """A filling of a Young diagram, strictly increasing along rows and columns.

    ``rows[y][x]`` holds the entry of the box with lower-left corner
    ``(x, y)``.
    """

    def __init__(self, rows: Sequence[Sequence] = ()):
        self.rows = [list(r) for r in rows if len(r) > 0]

    @property
    def shape(self) -> YoungDiagram:
        return tuple(len(r) for r in self.rows)

    def __len__(self):
        return sum(len(r) for r in self.rows)

    def __getitem__(self, key):
        x, y = key
        return self.rows[y][x]

    def __eq__(self, other):
        if isinstance(other, Tableau):
            other = other.rows
        return self.rows == [list(r) for r in other]

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def __repr__(self):
        return f"{type(self).__name__}({self.rows!r})"

    def copy(self):
        return type(self)(self.rows)

    def entries(self):
        return [v for row in self.rows for v in row]

    def is_valid(self) -> bool:
        rows = self.rows
        try:
            validate_diagram([len(r) for r in rows])
        except ValueError:
            return False
        for row in rows:
            if any(row[i] >= row[i + 1] for i in range(len(row) - 1)):
                return False
        for y in range(len(rows) - 1):
            lower, upper = rows[y], rows[y + 1]
            if any(lower[x] >= upper[x] for x in range(len(upper))):
                return False
        return True

    def validate(self):
        if not self.is_valid():
            raise ValueError(f"not a valid tableau: {self.rows!r}")
        if len(set(self.entries())) != len(self):
            raise DuplicateEntryError("tableau entries are not distinct")
        return self


class RecordingTableau(Tableau):
    """Standard tableau whose entries are the insertion step numbers 1..n."""

    def is_standard(self) -> bool:
        return self.is_valid() and sorted(self.entries()) == list(range(1, len(self) + 1))


def schensted_insert(T: Tableau, a) -> Tuple[Tableau, List[RouteStep]]:
    """Return ``(T <- a, bumping route)`` without modifying ``T``."""
    T.validate()
    rows = [list(r) for r in T.rows]
    route, _ = _insert_inplace(rows, a)
    return Tableau(rows), route


def rsk(word: Sequence) -> Tuple[Tableau, RecordingTableau, YoungDiagram]:
    """Insertion tableau, recording tableau and common shape of ``word``."""
    if len(set(word)) != len(word):
        raise DuplicateEntryError("word letters must be pairwise distinct")
    P_rows: List[list] = []
    Q_rows: List[list] = []
    for i, a in enumerate(word, start=1):
        _, y = _insert_inplace(P_rows, a)
        if y == len(Q_rows):
            Q_rows.append([])
        Q_rows[y].append(i)
    P = Tableau(P_rows)
    return P, RecordingTableau(Q_rows), P.shape


def truncated_insert(rows: Sequence[Sequence], a, k: int, inplace: bool = False):
    """Schensted insertion restricted to the bottom ``k + 1`` rows.

    ``rows`` are rows ``0..k`` (possibly fewer, if the tableau is shorter)
    of a valid tableau.  Returns the updated rows and the growth label: the
    index of the row that received a new box, or ``INF`` when the cascade
    left row ``k``.  Rows above ``k`` never influence rows ``0..k``, so the
    result agrees with full insertion on the tracked rows.

    With ``inplace=True`` the given list of lists is updated and returned.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if len(rows) > k + 1:
        raise ValueError(f"expected at most {k + 1} rows, got {len(rows)}")
    new_rows = rows if inplace else [list(r) for r in rows]
    _, y = _insert_inplace(new_rows, a, max_rows=k + 1)
    return new_rows, (INF if y is None else y)
