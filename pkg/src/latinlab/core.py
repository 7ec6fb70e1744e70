"""Latin rectangles and squares, their induced permutations, and boxes.

Internally rows, columns and symbols are all 0-based (symbols ``0..n-1``).
The 1-based convention only appears at the serialization boundary
(:func:`parse_rectangle`, :func:`to_text`, :func:`to_json`, :func:`from_json`).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import RepeatError, ShapeError, SymbolError

__all__ = [
    "LatinRectangle",
    "LatinSquare",
    "CycleStructure",
    "IncidenceView",
    "Box",
    "make_rectangle",
    "parse_rectangle",
    "to_text",
    "to_json",
    "from_json",
    "cyclic_square",
    "cycle_structure",
    "sigma_row_pair",
    "tau_column_pair",
    "incidence_count",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.intp)
    a.setflags(write=False)
    return a


def _check_cells(cells: np.ndarray) -> None:
    """Raise the first invariant violation found, naming the cell."""
    if cells.ndim != 2:
        raise ShapeError("cells must be a 2-d array")
    k, n = cells.shape
    if n == 0 or k == 0:
        raise ShapeError("empty array")
    if k > n:
        raise ShapeError(f"{k} rows exceed {n} columns")
    bad = np.argwhere((cells < 0) | (cells >= n))
    if len(bad):
        r, c = bad[0]
        raise SymbolError(f"symbol {cells[r, c] + 1} outside 1..{n}", int(r), int(c))
    expected = np.arange(n)
    if not (np.sort(cells, axis=1) == expected).all():
        for r in range(k):
            seen = {}
            for c in range(n):
                s = int(cells[r, c])
                if s in seen:
                    raise RepeatError(f"symbol {s + 1} repeats in row {r + 1}", r, c)
                seen[s] = c
    srt = np.sort(cells, axis=0)
    if k > 1 and (srt[1:] == srt[:-1]).any():
        for c in range(n):
            seen = {}
            for r in range(k):
                s = int(cells[r, c])
                if s in seen:
                    raise RepeatError(f"symbol {s + 1} repeats in column {c + 1}", r, c)
                seen[s] = r


class LatinRectangle:
    """A validated k x n Latin rectangle with O(1) position lookups.

    ``cells[i, x]`` is the (0-based) symbol in row ``i``, column ``x``;
    ``col_of[i, q]`` is the column holding symbol ``q`` in row ``i``;
    ``row_of[x, q]`` is the row holding ``q`` in column ``x`` or ``-1``.
    Instances are immutable; every switching returns a new object.
    """

    __slots__ = ("cells", "col_of", "row_of", "_hash")

    def __init__(self, cells, *, validate: bool = True):
        cells = np.array(cells, dtype=np.intp)
        if validate:
            _check_cells(cells)
        k, n = cells.shape
        col_of = np.empty((k, n), dtype=np.intp)
        col_of[np.arange(k)[:, None], cells] = np.arange(n)[None, :]
        row_of = np.full((n, n), -1, dtype=np.intp)
        row_of[np.arange(n)[None, :], cells] = np.arange(k)[:, None]
        self.cells = _frozen(cells)
        self.col_of = _frozen(col_of)
        self.row_of = _frozen(row_of)
        self._hash = None

    @property
    def k(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return self.cells.shape[1]

    @property
    def is_square(self) -> bool:
        return self.k == self.n

    def __getitem__(self, pos):
        return int(self.cells[pos])

    def rows(self) -> list[list[int]]:
        """Rows with external 1-based symbols."""
        return (self.cells + 1).tolist()

    def key(self) -> bytes:
        """Compact hashable identity of the cell contents."""
        return self.cells.astype(np.uint8 if self.n < 256 else np.uint32).tobytes()

    def __eq__(self, other):
        if not isinstance(other, LatinRectangle):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool((self.cells == other.cells).all())

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.cells.shape, self.key()))
        return self._hash

    def __repr__(self):
        kind = type(self).__name__
        return f"{kind}({self.rows()!r})"

    def with_cells(self, cells, *, validate: bool = True) -> "LatinRectangle":
        """Build a rectangle of the matching kind from modified cells."""
        return make_rectangle(cells, validate=validate)

    def permute_rows(self, order: Sequence[int]) -> "LatinRectangle":
        return self.with_cells(self.cells[list(order)], validate=False)

    def transpose(self) -> "LatinSquare":
        if not self.is_square:
            raise ShapeError("only squares can be transposed")
        return LatinSquare(self.cells.T, validate=False)

    def relabel(self, perm: Sequence[int]) -> "LatinRectangle":
        """Rename symbol ``q`` to ``perm[q]``."""
        return self.with_cells(np.asarray(perm, dtype=np.intp)[self.cells], validate=False)

    def rectangle(self, k: int) -> "LatinRectangle":
        """The sub-rectangle formed by the first ``k`` rows."""
        return make_rectangle(self.cells[:k], validate=False)


class LatinSquare(LatinRectangle):
    """A Latin rectangle with as many rows as columns."""

    __slots__ = ()

    def __init__(self, cells, *, validate: bool = True):
        super().__init__(cells, validate=validate)
        if self.k != self.n:
            raise ShapeError(f"a square needs {self.n} rows, got {self.k}")
        if validate:
            # Forced by the rectangle conditions, asserted anyway.
            assert (np.sort(self.cells, axis=0) == np.arange(self.n)[:, None]).all()


def make_rectangle(cells, *, validate: bool = True) -> LatinRectangle:
    """Return a :class:`LatinSquare` when the shape is square."""
    cells = np.asarray(cells)
    if cells.ndim == 2 and cells.shape[0] == cells.shape[1]:
        return LatinSquare(cells, validate=validate)
    return LatinRectangle(cells, validate=validate)


def cyclic_square(n: int) -> LatinSquare:
    """The Cayley table of Z_n: ``L[i, x] = i + x mod n``."""
    i = np.arange(n)
    return LatinSquare((i[:, None] + i[None, :]) % n, validate=False)


# -- serialization -----------------------------------------------------------


def parse_rectangle(text) -> LatinRectangle:
    """Parse the text format.

    Line 1 is ``"k n"`` or ``"n"`` (meaning ``k = n``); then ``k`` lines of
    ``n`` space-separated symbols in ``1..n``.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ShapeError("empty input")
    header = lines[0].split()
    try:
        dims = [int(t) for t in header]
    except ValueError:
        raise ShapeError(f"bad header {lines[0]!r}") from None
    if len(dims) == 1:
        k = n = dims[0]
    elif len(dims) == 2:
        k, n = dims
    else:
        raise ShapeError(f"bad header {lines[0]!r}")
    if n < 1 or k < 1:
        raise ShapeError(f"bad dimensions {k}x{n}")
    if k > n:
        raise ShapeError(f"{k} rows exceed {n} columns")
    body = lines[1:]
    if len(body) != k:
        raise ShapeError(f"expected {k} rows, got {len(body)}")
    cells = np.empty((k, n), dtype=np.intp)
    for r, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != n:
            raise ShapeError(f"expected {n} entries, got {len(toks)}", r)
        for c, t in enumerate(toks):
            try:
                v = int(t)
            except ValueError:
                raise SymbolError(f"non-integer symbol {t!r}", r, c) from None
            if not 1 <= v <= n:
                raise SymbolError(f"symbol {v} outside 1..{n}", r, c)
            cells[r, c] = v - 1
    return make_rectangle(cells)


def to_text(L: LatinRectangle) -> str:
    header = f"{L.n}" if L.is_square else f"{L.k} {L.n}"
    body = "\n".join(" ".join(map(str, row)) for row in L.rows())
    return f"{header}\n{body}\n"


def to_json(L: LatinRectangle) -> str:
    return json.dumps({"n": L.n, "k": L.k, "rows": L.rows()}, separators=(",", ":"))


def from_json(text) -> LatinRectangle:
    obj = json.loads(text)
    rows = obj["rows"]
    k, n = obj.get("k", len(rows)), obj["n"]
    if len(rows) != k or any(len(r) != n for r in rows):
        raise ShapeError(f"rows do not match declared shape {k}x{n}")
    cells = np.array(rows, dtype=np.intp) - 1
    return make_rectangle(cells)


# -- induced permutations ----------------------------------------------------


@dataclass(frozen=True)
class CycleStructure:
    """Cycle decomposition of a permutation of ``0..n-1``.

    Cycles are listed in traversal order starting from their minimum
    element, and sorted by that minimum, so equal permutations give
    identical structures.
    """

    perm: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...]
    cycle_of: tuple[int, ...]
    counts_by_length: dict[int, int] = field(compare=False)

    def __len__(self):
        return len(self.perm)

    def cycle(self, x: int) -> tuple[int, ...]:
        return self.cycles[self.cycle_of[x]]

    def length_of(self, x: int) -> int:
        return len(self.cycles[self.cycle_of[x]])

    def count(self, length: int) -> int:
        """Number of cycles of the given length."""
        return self.counts_by_length.get(length, 0)

    def cycles_of_length(self, length: int) -> list[tuple[int, ...]]:
        return [c for c in self.cycles if len(c) == length]

    def same_cycle(self, x: int, y: int) -> bool:
        return self.cycle_of[x] == self.cycle_of[y]

    def fixed_points(self) -> list[int]:
        return [x for x, y in enumerate(self.perm) if x == y]

    def inverse(self) -> "CycleStructure":
        inv = [0] * len(self.perm)
        for x, y in enumerate(self.perm):
            inv[y] = x
        return cycle_structure(inv)

    def multiset(self) -> Counter:
        return Counter(len(c) for c in self.cycles)


def cycle_structure(perm: Iterable[int]) -> CycleStructure:
    perm = tuple(int(p) for p in perm)
    n = len(perm)
    cycle_of = [-1] * n
    cycles = []
    for start in range(n):
        if cycle_of[start] >= 0:
            continue
        cyc = []
        x = start
        while cycle_of[x] < 0:
            cycle_of[x] = len(cycles)
            cyc.append(x)
            x = perm[x]
        cycles.append(tuple(cyc))
    counts = Counter(len(c) for c in cycles)
    return CycleStructure(perm, tuple(cycles), tuple(cycle_of), dict(sorted(counts.items())))


def _check_index(i: int, bound: int, what: str) -> None:
    if not 0 <= i < bound:
        raise IndexError(f"{what} {i} out of range 0..{bound - 1}")


def sigma_perm(L: LatinRectangle, i: int, j: int) -> np.ndarray:
    """Array form of sigma_{i,j}: column x goes to the column y with L[i,y] = L[j,x]."""
    return L.col_of[i, L.cells[j]]


def sigma_row_pair(L: LatinRectangle, i: int, j: int) -> CycleStructure:
    """Cycle structure of the column permutation induced by rows ``i`` and ``j``."""
    _check_index(i, L.k, "row")
    _check_index(j, L.k, "row")
    if i == j:
        raise IndexError("rows must differ")
    return cycle_structure(sigma_perm(L, i, j))


def tau_perm(L: LatinSquare, x: int, y: int) -> np.ndarray:
    """Array form of tau_{x,y}: row i goes to the row j with L[j,x] = L[i,y]."""
    return L.row_of[x, L.cells[:, y]]


def tau_column_pair(L: LatinSquare, x: int, y: int) -> CycleStructure:
    """Cycle structure of the row permutation induced by columns ``x`` and ``y``."""
    if not L.is_square:
        raise ShapeError("tau needs a Latin square")
    _check_index(x, L.n, "column")
    _check_index(y, L.n, "column")
    if x == y:
        raise IndexError("columns must differ")
    return cycle_structure(tau_perm(L, x, y))


# -- incidence view and boxes ------------------------------------------------


class IncidenceView:
    """Read-only n x n x n zero-one view: ``A[i, x, q] == 1`` iff ``L[i, x] == q``.

    Nothing is materialized; entries and line sums come from the lookups.
    """

    def __init__(self, L: LatinSquare):
        self.L = L

    @property
    def shape(self):
        n = self.L.n
        return (n, n, n)

    def __getitem__(self, idx) -> int:
        i, x, q = idx
        return int(self.L.cells[i, x] == q)

    def line_sum(self, axis: int, a: int, b: int) -> int:
        """Sum along ``axis`` with the other two coordinates fixed to (a, b)."""
        L = self.L
        if axis == 2:  # (i, x) fixed
            return 1
        if axis == 1:  # (i, q) fixed
            return int(L.col_of[a, b] >= 0)
        return int(L.row_of[a, b] >= 0)  # (x, q) fixed

    def line_sums_ok(self) -> bool:
        n = self.L.n
        return all(
            self.line_sum(ax, a, b) == 1 for ax in range(3) for a in range(n) for b in range(n)
        )


@dataclass(frozen=True)
class Box:
    """A combinatorial box ``I x X x Q`` of rows, columns and symbols."""

    rows: frozenset
    cols: frozenset
    symbols: frozenset

    def __init__(self, rows, cols, symbols):
        object.__setattr__(self, "rows", frozenset(int(v) for v in rows))
        object.__setattr__(self, "cols", frozenset(int(v) for v in cols))
        object.__setattr__(self, "symbols", frozenset(int(v) for v in symbols))

    @classmethod
    def full(cls, n: int) -> "Box":
        r = range(n)
        return cls(r, r, r)

    @property
    def vol(self) -> int:
        return len(self.rows) * len(self.cols) * len(self.symbols)

    def sizes(self) -> tuple[int, int, int]:
        return len(self.rows), len(self.cols), len(self.symbols)

    def check(self, n: int) -> None:
        for name, s in (("row", self.rows), ("column", self.cols), ("symbol", self.symbols)):
            if s and (min(s) < 0 or max(s) >= n):
                raise ValueError(f"box {name} index outside 0..{n - 1}")


def incidence_count(L: LatinSquare, box: Box) -> int:
    """Number of cells (i, x) in I x X whose symbol lies in Q."""
    box.check(L.n)
    if not (box.rows and box.cols and box.symbols):
        return 0
    I = np.fromiter(sorted(box.rows), dtype=np.intp)
    X = np.fromiter(sorted(box.cols), dtype=np.intp)
    mask = np.zeros(L.n, dtype=bool)
    mask[list(box.symbols)] = True
    return int(mask[L.cells[np.ix_(I, X)]].sum())
