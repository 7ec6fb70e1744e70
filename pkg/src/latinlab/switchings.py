"""Switching operations on Latin squares and rectangles.

Row-pair switchings (turn, flip, join) act on the first two rows, i.e.
the permutation sigma_{0,1}; :func:`rows_to_front` relabels rows so any
pair can be handled the same way.  Rotate and twist act on a single row
of a Latin rectangle and create exactly one intercalate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .budget import node_budget
from .core import (
    LatinRectangle,
    LatinSquare,
    sigma_row_pair,
    tau_perm,
)
from .errors import (
    CycleError,
    JoinPrecondition,
    NotFlippable,
    ResourceError,
    TwistInvalid,
    ValidationError,
)
from .intercalates import census, cell_intercalates

__all__ = [
    "JoinChoice",
    "TwistChoice",
    "RawArray",
    "TwistCount",
    "ClassRatioReport",
    "rows_to_front",
    "turn",
    "turn_at",
    "is_flippable",
    "flip",
    "join",
    "enumerate_single_joins",
    "enumerate_double_joins",
    "single_join_predecessors",
    "double_join_predecessors",
    "rotate",
    "twist",
    "check_twist",
    "propose_twist",
    "enumerate_twists",
    "twist_predecessors",
    "brute_force_twist_count",
    "is_good",
    "class_ratios",
]


def sigma12(L: LatinRectangle):
    return sigma_row_pair(L, 0, 1)


def rows_to_front(L: LatinRectangle, i: int, j: int):
    """Reorder rows so that ``i, j`` become rows 0, 1.

    Returns the relabelled rectangle and the row order; apply
    ``restore_rows`` to map a result back.
    """
    if i == j:
        raise IndexError("rows must differ")
    rest = [r for r in range(L.k) if r not in (i, j)]
    order = [i, j, *rest]
    return L.permute_rows(order), order


def restore_rows(L: LatinRectangle, order) -> LatinRectangle:
    inv = np.argsort(order)
    return L.permute_rows(inv)


# -- turn / flip / join ------------------------------------------------------


def turn(L: LatinSquare, cycle) -> LatinSquare:
    """Exchange rows 0 and 1 on every column of a sigma_{0,1} cycle."""
    cols = sorted(int(c) for c in cycle)
    if not cols:
        raise CycleError("empty cycle")
    cs = sigma12(L)
    if sorted(cs.cycle(cols[0])) != cols:
        raise CycleError(f"columns {cols} are not a cycle of sigma_(1,2)")
    cells = L.cells.copy()
    cells[0, cols], cells[1, cols] = L.cells[1, cols], L.cells[0, cols]
    return L.with_cells(cells, validate=False)


def turn_at(L: LatinSquare, x: int) -> LatinSquare:
    """turn applied to the cycle containing column ``x``."""
    return turn(L, sigma12(L).cycle(x))


def _tau_cycle_rows(L: LatinSquare, x: int, y: int, start: int) -> list[int]:
    perm = tau_perm(L, x, y)
    out = [start]
    r = int(perm[start])
    while r != start:
        out.append(r)
        r = int(perm[r])
    return out


def is_flippable(L: LatinSquare, x: int, y: int) -> bool:
    """True when rows 0 and 1 lie in different cycles of tau_{x,y}."""
    if x == y:
        raise IndexError("columns must differ")
    if not (0 <= x < L.n and 0 <= y < L.n):
        raise IndexError(f"columns {x},{y} out of range")
    return 0 not in _tau_cycle_rows(L, x, y, 1)


def flip(L: LatinSquare, x: int, y: int) -> LatinSquare:
    """Exchange columns x and y on every row of the tau_{x,y}-cycle through row 1."""
    if not is_flippable(L, x, y):
        raise NotFlippable(f"{{{x},{y}}} is not flippable")
    rows = _tau_cycle_rows(L, x, y, 1)
    cells = L.cells.copy()
    cells[rows, x], cells[rows, y] = L.cells[rows, y], L.cells[rows, x]
    return L.with_cells(cells, validate=False)


@dataclass(frozen=True)
class JoinChoice:
    x: int
    y: int
    kind: str  # "single" or "double"
    used_turn: bool


def join(L: LatinSquare, x: int, y: int) -> tuple[LatinSquare, JoinChoice]:
    """Merge the 2-cycle through ``y`` with the cycle through ``x``.

    Flips directly when {x, y} is flippable, otherwise turns the cycle of
    ``y`` first (which makes the pair flippable without changing sigma).
    """
    cs = sigma12(L)
    if cs.same_cycle(x, y):
        raise JoinPrecondition(f"columns {x} and {y} share a cycle")
    if cs.length_of(y) != 2:
        raise JoinPrecondition(f"column {y} is not in an intercalate of rows 1,2")
    kind = "double" if cs.length_of(x) == 2 else "single"
    if is_flippable(L, x, y):
        return flip(L, x, y), JoinChoice(x, y, kind, False)
    return flip(turn(L, cs.cycle(y)), x, y), JoinChoice(x, y, kind, True)


def enumerate_single_joins(L: LatinSquare) -> list[tuple[JoinChoice, LatinSquare]]:
    """Every (x outside an intercalate, y inside one) join, in column order."""
    cs = sigma12(L)
    in_two = [cs.length_of(x) == 2 for x in range(L.n)]
    out = []
    for x in range(L.n):
        if in_two[x]:
            continue
        for y in range(L.n):
            if in_two[y]:
                res, choice = join(L, x, y)
                out.append((choice, res))
    return out


def enumerate_double_joins(L: LatinSquare) -> list[tuple[JoinChoice, LatinSquare]]:
    """Every ordered (x, y) pair taken from two different intercalates."""
    cs = sigma12(L)
    out = []
    for x in range(L.n):
        if cs.length_of(x) != 2:
            continue
        for y in range(L.n):
            if cs.length_of(y) == 2 and not cs.same_cycle(x, y):
                res, choice = join(L, x, y)
                out.append((choice, res))
    return out


def _join_predecessors(Lp: LatinSquare, kind: str) -> set[LatinSquare]:
    # join = flip o (turn or identity), both involutions: undo the flip on
    # every flippable pair, optionally undo the turn, and keep candidates
    # that really join back to Lp.
    n = Lp.n
    found = set()
    for x in range(n):
        for y in range(n):
            if x == y or not is_flippable(Lp, x, y):
                continue
            base = flip(Lp, x, y)
            cs = sigma12(base)
            if cs.same_cycle(x, y) or cs.length_of(y) != 2:
                continue
            if (cs.length_of(x) == 2) != (kind == "double"):
                continue
            for cand in (base, turn(base, cs.cycle(y))):
                if join(cand, x, y)[0] == Lp:
                    found.add(cand)
    return found


def single_join_predecessors(Lp: LatinSquare) -> set[LatinSquare]:
    """All squares that reach ``Lp`` by one single join."""
    return _join_predecessors(Lp, "single")


def double_join_predecessors(Lp: LatinSquare) -> set[LatinSquare]:
    """All squares that reach ``Lp`` by one double join."""
    return _join_predecessors(Lp, "double")


# -- rotate / twist ----------------------------------------------------------


@dataclass(frozen=True)
class RawArray:
    """A k x n array that may violate the column condition."""

    cells: np.ndarray

    @property
    def is_latin(self) -> bool:
        c = np.sort(self.cells, axis=0)
        return not (c[1:] == c[:-1]).any()

    def to_rectangle(self) -> LatinRectangle:
        if not self.is_latin:
            raise ValidationError("rotated array repeats a symbol in a column")
        from .core import make_rectangle

        return make_rectangle(self.cells, validate=False)


def rotate(L, i: int, triple) -> RawArray:
    """Cycle the symbols at (i,x), (i,y), (i,z): x takes z's, y takes x's, z takes y's."""
    x, y, z = triple
    if len({x, y, z}) != 3:
        raise ValueError("rotate needs three distinct columns")
    src = L.cells
    cells = np.array(src, dtype=np.intp)
    cells[i, x], cells[i, y], cells[i, z] = src[i, z], src[i, x], src[i, y]
    return RawArray(cells)


@dataclass(frozen=True)
class TwistChoice:
    i: int
    triple1: tuple[int, int, int]
    triple2: tuple[int, int, int]

    @property
    def columns(self) -> tuple[int, ...]:
        return (*self.triple1, *self.triple2)

    def canonical(self) -> "TwistChoice":
        """Order the two triples (swapping them gives the same twist)."""
        a, b = sorted((self.triple1, self.triple2))
        return TwistChoice(self.i, a, b)


def is_good(L: LatinRectangle, cap: int) -> bool:
    """No row is involved in more than ``cap`` intercalates."""
    return census(L).max_row <= cap


def _apply_twist(L: LatinRectangle, c: TwistChoice) -> RawArray:
    return rotate(rotate(L, c.i, c.triple2), c.i, c.triple1)


def check_twist(L: LatinRectangle, c: TwistChoice, cap: int) -> LatinRectangle:
    """Validate a twist and return the twisted rectangle or raise TwistInvalid."""
    i = c.i
    x, y, z = c.triple1
    x2, y2, z2 = c.triple2
    if len(set(c.columns)) != 6:
        raise TwistInvalid(0, "distinct", f"columns {c.columns} repeat")
    raw = _apply_twist(L, c)
    if not raw.is_latin:
        raise TwistInvalid(1, "latin", "a column repeats a symbol")
    Lp = raw.to_rectangle()
    cen = census(Lp)
    if cen.max_row > cap:
        raise TwistInvalid(1, "good", f"a row lies in {cen.max_row} > {cap} intercalates")
    for col in (y, z, y2, z2):
        for name, M in (("before", L), ("after", Lp)):
            if cell_intercalates(M, i, col):
                raise TwistInvalid(2, "clean", f"({i},{col}) is in an intercalate {name}")
    for col in (x, x2):
        if cell_intercalates(L, i, col):
            raise TwistInvalid(3, "anchor", f"({i},{col}) is in an intercalate before")
    at_x = cell_intercalates(Lp, i, x)
    at_x2 = cell_intercalates(Lp, i, x2)
    if len(at_x) != 1 or len(at_x2) != 1 or at_x[0][1] != x2 or at_x2[0][1] != x:
        raise TwistInvalid(3, "anchor", "no unique new intercalate through both anchors")
    return Lp


def twist(L: LatinRectangle, choice: TwistChoice, cap: int) -> LatinRectangle:
    """Apply a twist; ``L`` must be good (no row in more than ``cap`` intercalates)."""
    if not is_good(L, cap):
        raise ValueError(f"input rectangle is not good for cap {cap}")
    return check_twist(L, choice, cap)


def propose_twist(L: LatinRectangle, i: int, j: int, x: int, x2: int, y: int, y2: int) -> TwistChoice:
    """Choice aimed at an intercalate on rows i, j and columns x, x2.

    z2 holds L[j, x] in row i and z holds L[j, x2], so after the twist
    (i, x) carries L[j, x2] and (i, x2) carries L[j, x].
    """
    z2 = int(L.col_of[i, L.cells[j, x]])
    z = int(L.col_of[i, L.cells[j, x2]])
    return TwistChoice(i, (x, y, z), (x2, y2, z2))


@dataclass
class TwistCount:
    forward: int  # unordered valid choices
    forward_results: int  # distinct rectangles reached
    sample: list[TwistChoice]
    candidates: int


def enumerate_twists(L: LatinRectangle, cap: int, budget: int | None = None,
                     sample_size: int = 5) -> TwistCount:
    """Exact count of valid twists from ``L``.

    Every valid twist creates its intercalate with a unique row j, so the
    search runs over (i, j, x, x', y, y') with z, z' forced.  Rows, then
    columns, are scanned in ascending order; each unordered choice is seen
    twice (once per triple order) and counted once.
    """
    k, n = L.k, L.n
    if budget is None:
        budget = node_budget(10**7)
    if k * (k - 1) * n**4 > budget:
        raise ResourceError(f"twist enumeration over k={k}, n={n} exceeds budget {budget}")
    if not is_good(L, cap):
        raise ValueError(f"input rectangle is not good for cap {cap}")
    seen: set[TwistChoice] = set()
    results = set()
    sample: list[TwistChoice] = []
    cands = 0
    for i in range(k):
        for j in range(k):
            if j == i:
                continue
            for x in range(n):
                for x2 in range(n):
                    if x2 == x:
                        continue
                    for y in range(n):
                        for y2 in range(n):
                            c = propose_twist(L, i, j, x, x2, y, y2)
                            if len(set(c.columns)) != 6:
                                continue
                            cands += 1
                            try:
                                Lp = check_twist(L, c, cap)
                            except TwistInvalid:
                                continue
                            key = c.canonical()
                            if key not in seen:
                                seen.add(key)
                                results.add(Lp)
                                if len(sample) < sample_size:
                                    sample.append(c)
    return TwistCount(len(seen), len(results), sample, cands)


def brute_force_twist_count(L: LatinRectangle, cap: int) -> int:
    """Unordered valid twists found by testing every row and 6-column tuple."""
    valid = set()
    for i in range(L.k):
        for cols in permutations(range(L.n), 6):
            c = TwistChoice(i, cols[:3], cols[3:])
            try:
                check_twist(L, c, cap)
            except TwistInvalid:
                continue
            valid.add(c.canonical())
    return len(valid)


def twist_predecessors(Lp: LatinRectangle, cap: int) -> tuple[set[LatinRectangle], int]:
    """Good rectangles that twist to ``Lp``, plus the number of choices tried.

    The created intercalate is one of those in ``Lp``, worked from one of its
    two rows; with x < x' its columns, every ordered (y, z, y', z') is undone
    by inverse rotation and kept if it twists forward to ``Lp``.
    """
    n = Lp.n
    cen = census(Lp, with_witnesses=True)
    found = set()
    tried = 0
    for w in cen.witnesses:
        x, x2 = w.cols
        for i in w.rows:
            rest = [c for c in range(n) if c not in (x, x2)]
            for y, z, y2, z2 in permutations(rest, 4):
                tried += 1
                cells = np.array(Lp.cells)
                src = Lp.cells
                # inverse of rotate (x y z): L[z] = L'[x], L[x] = L'[y], L[y] = L'[z]
                for a, b, d in ((x, y, z), (x2, y2, z2)):
                    cells[i, d], cells[i, a], cells[i, b] = src[i, a], src[i, b], src[i, d]
                raw = RawArray(cells)
                if not raw.is_latin:
                    continue
                L = raw.to_rectangle()
                if not is_good(L, cap):
                    continue
                try:
                    res = check_twist(L, TwistChoice(i, (x, y, z), (x2, y2, z2)), cap)
                except TwistInvalid:
                    continue
                if res == Lp:
                    found.add(L)
    return found, tried


# -- class ratios ------------------------------------------------------------


@dataclass
class ClassRatioReport:
    """Exact |L(s)| (squares with s intercalates in rows 1, 2) and ratio checks."""

    n: int
    class_sizes: dict[int, int]
    rows: list[dict]

    @property
    def total(self) -> int:
        return sum(self.class_sizes.values())

    def all_within_bounds(self) -> bool:
        return all(r["single_ok"] is not False and r["double_ok"] is not False for r in self.rows)


def class_ratios(n: int, class_sizes: dict[int, int] | None = None) -> ClassRatioReport:
    """Compare |L(s+1)|/|L(s)| with (n-2s)/((s+1)(n-2s-2)) and
    |L(s+2)|/|L(s)| with n/s^2, in exact rational arithmetic."""
    if class_sizes is None:
        from .oracle import enumerate_squares

        class_sizes = enumerate_squares(n).class_sizes
    sizes = {s: class_sizes.get(s, 0) for s in range(n // 2 + 1)}
    rows = []
    for s in range(n // 2 + 1):
        row = {"s": s, "size": sizes[s], "ratio1": None, "bound1": None, "single_ok": None,
               "ratio2": None, "bound2": None, "double_ok": None}
        a = sizes[s]
        if a > 0 and s + 1 in sizes and n - 2 * s - 2 > 0:
            row["ratio1"] = Fraction(sizes[s + 1], a)
            row["bound1"] = Fraction(n - 2 * s, (s + 1) * (n - 2 * s - 2))
            row["single_ok"] = row["ratio1"] <= row["bound1"]
        if a > 0 and s >= 1 and s + 2 in sizes:
            row["ratio2"] = Fraction(sizes[s + 2], a)
            row["bound2"] = Fraction(n, s * s)
            row["double_ok"] = row["ratio2"] <= row["bound2"]
        rows.append(row)
    return ClassRatioReport(n, sizes, rows)
