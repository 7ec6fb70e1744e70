"""Intercalate (2x2 subsquare) counting and small-subsquare search."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .budget import node_budget
from .core import LatinRectangle, LatinSquare, sigma_perm
from .errors import ResourceError

__all__ = [
    "Intercalate",
    "IntercalateCensus",
    "count_two_rows",
    "census",
    "intercalate_count",
    "cell_intercalates",
    "row_involvement",
    "subsquare_count",
]


@dataclass(frozen=True, order=True)
class Intercalate:
    rows: tuple[int, int]
    cols: tuple[int, int]
    symbols: tuple[int, int]

    @classmethod
    def at(cls, L: LatinRectangle, i: int, j: int, x: int, y: int) -> "Intercalate":
        i, j = sorted((i, j))
        x, y = sorted((x, y))
        if i == j or x == y or L[i, x] != L[j, y] or L[i, y] != L[j, x]:
            raise ValueError(f"rows {i},{j} x cols {x},{y} is not an intercalate")
        return cls((i, j), (x, y), tuple(sorted((L[i, x], L[i, y]))))

    def cells(self):
        return [(r, c) for r in self.rows for c in self.cols]


@dataclass(frozen=True)
class IntercalateCensus:
    total: int
    per_row: tuple[int, ...]
    per_row_pair: dict[tuple[int, int], int]
    witnesses: list[Intercalate] | None = None

    @property
    def max_row(self) -> int:
        """Largest number of intercalates any single row is involved in."""
        return max(self.per_row) if self.per_row else 0

    def pair_histogram(self) -> dict[int, int]:
        """count -> number of row pairs with that many intercalates."""
        k = len(self.per_row)
        hist: dict[int, int] = {}
        for c in self.per_row_pair.values():
            hist[c] = hist.get(c, 0) + 1
        zero = k * (k - 1) // 2 - len(self.per_row_pair)
        if zero:
            hist[0] = zero
        return dict(sorted(hist.items()))


def count_two_rows(L: LatinRectangle, i: int, j: int) -> int:
    """Intercalates using rows ``i`` and ``j``: the 2-cycles of sigma_{i,j}."""
    if not (0 <= i < L.k and 0 <= j < L.k):
        raise IndexError(f"rows {i},{j} out of range")
    if i == j:
        raise IndexError("rows must differ")
    s = sigma_perm(L, i, j)
    return int((s[s] == np.arange(L.n)).sum()) // 2


def census(L: LatinRectangle, with_witnesses: bool = False) -> IntercalateCensus:
    """Exact intercalate census in O(k^2 n), vectorised over the second row."""
    k, n = L.k, L.n
    ar = np.arange(n)
    per_row = np.zeros(k, dtype=np.int64)
    per_pair: dict[tuple[int, int], int] = {}
    witnesses = [] if with_witnesses else None
    for i in range(k - 1):
        sig = L.col_of[i][L.cells[i + 1 :]]  # row t is sigma_{i, i+1+t}
        two = np.take_along_axis(sig, sig, axis=1) == ar
        counts = two.sum(axis=1) // 2
        per_row[i] += counts.sum()
        per_row[i + 1 :] += counts
        for t in np.flatnonzero(counts):
            j = i + 1 + int(t)
            per_pair[(i, j)] = int(counts[t])
            if with_witnesses:
                for x in np.flatnonzero(two[t] & (ar < sig[t])):
                    witnesses.append(Intercalate.at(L, i, j, int(x), int(sig[t, x])))
    total = int(per_row.sum()) // 2
    if witnesses is not None:
        witnesses.sort()
    return IntercalateCensus(total, tuple(int(v) for v in per_row), per_pair, witnesses)


def intercalate_count(L: LatinRectangle) -> int:
    return census(L).total


def cell_intercalates(L: LatinRectangle, i: int, x: int) -> list[tuple[int, int]]:
    """All (row j, column y) completing an intercalate through cell (i, x)."""
    q = L.cells[i, x]
    ys = L.col_of[:, q]  # column of q in every row
    hit = L.cells[i, ys] == L.cells[:, x]
    hit[i] = False
    return [(int(j), int(ys[j])) for j in np.flatnonzero(hit)]


def row_involvement(L: LatinRectangle) -> tuple[int, ...]:
    return census(L).per_row


def _cycle_subsets(cycles, m, start=0):
    """Yield lists of cycles whose total length is exactly ``m``."""
    for t in range(start, len(cycles)):
        c = cycles[t]
        if len(c) == m:
            yield [c]
        elif len(c) < m:
            for rest in _cycle_subsets(cycles, m - len(c), t + 1):
                yield [c, *rest]


def subsquare_count(L: LatinSquare, m: int, budget: int | None = None) -> int:
    """Number of m x m Latin subsquares of ``L``.

    A subsquare on rows R and columns C with first row r0 = min R has its
    column set closed under sigma_{r0,r} for every r in R.  So for the two
    smallest rows r0 < r1 we enumerate unions of sigma_{r0,r1}-cycles of
    total size m, then count the later rows that map C onto the same symbol
    set.  Each subsquare is found exactly once.
    """
    n = L.n
    if not 2 <= m <= n:
        raise ValueError(f"subsquare order must lie in 2..{n}")
    if budget is None:
        budget = node_budget()
    nodes = 0
    total = 0
    cells = L.cells
    for r0 in range(n - 1):
        for r1 in range(r0 + 1, n):
            perm = sigma_perm(L, r0, r1)
            seen = np.zeros(n, dtype=bool)
            cycles = []
            for s in range(n):
                if not seen[s]:
                    cyc = []
                    x = s
                    while not seen[x]:
                        seen[x] = True
                        cyc.append(x)
                        x = perm[x]
                    cycles.append(cyc)
            for chosen in _cycle_subsets(cycles, m):
                nodes += 1
                if nodes > budget:
                    raise ResourceError(f"subsquare search exceeded {budget} nodes")
                C = np.array(sorted(x for c in chosen for x in c), dtype=np.intp)
                if m == 2:
                    total += 1
                    continue
                target = np.sort(cells[r0, C])
                later = np.sort(cells[r1 + 1 :][:, C], axis=1)
                a = int((later == target).all(axis=1).sum())
                total += comb(a, m - 2)
    return total
