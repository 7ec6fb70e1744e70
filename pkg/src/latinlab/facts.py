"""Property checks for the switching calculus, and small experiments built on it.

Each ``check_*`` function returns a list of human-readable violation
strings; an empty list means the square passed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import _chain
from .core import LatinRectangle, LatinSquare, _check_cells, cyclic_square, sigma_row_pair
from .errors import NotFlippable, TwistInvalid, ValidationError
from .intercalates import census
from .rng import RawStream
from .sampler import ChainState
from .switchings import (
    check_twist,
    double_join_predecessors,
    enumerate_double_joins,
    enumerate_single_joins,
    flip,
    is_flippable,
    propose_twist,
    single_join_predecessors,
    turn,
)

__all__ = [
    "validate",
    "check_switching_rules",
    "check_join_rules",
    "random_twist_trial",
    "JoinCounts",
    "join_counts",
    "find_intercalate_free",
]


def validate(M: LatinRectangle, what: str, out: list[str], fault=None) -> None:
    cells = np.array(M.cells)
    if fault is not None:
        fault(cells)
    try:
        _check_cells(cells)
    except ValidationError as exc:
        out.append(f"{what}: output fails validation ({exc})")


def _cycle_sets(cs):
    return {frozenset(c) for c in cs.cycles}


def _pairs(n, rng: RawStream | None, count: int | None):
    if rng is None or count is None:
        return [(x, y) for x in range(n) for y in range(n) if x != y]
    out = []
    for _ in range(count):
        x = rng.below(n)
        y = rng.below(n - 1)
        out.append((x, y + (y >= x)))
    return out


def check_switching_rules(L: LatinSquare, rng: RawStream | None = None, pairs: int | None = None,
                 fault=None) -> list[str]:
    """Items (1)-(5) of the turn/flip observations on one square.

    Every cycle is turned; column pairs are scanned exhaustively unless
    ``rng`` and ``pairs`` ask for a random subset.
    """
    bad: list[str] = []
    cs = sigma_row_pair(L, 0, 1)
    for cyc in cs.cycles:
        T = turn(L, cyc)
        validate(T, f"turn{cyc}", bad, fault)
        if turn(T, cyc) != L:
            bad.append(f"(4) turn{cyc} is not an involution")
        if len(cyc) == 2 and sigma_row_pair(T, 0, 1) != cs:
            bad.append(f"(2) turn{cyc} changed sigma")
    for x, y in _pairs(L.n, rng, pairs):
        fl = is_flippable(L, x, y)
        if not cs.same_cycle(x, y):
            T = turn(L, cs.cycle(x))
            if is_flippable(T, x, y) == fl:
                bad.append(f"(3) turning c_{x} did not toggle flippability of {{{x},{y}}}")
        if not fl:
            continue
        F = flip(L, x, y)
        validate(F, f"flip{(x, y)}", bad, fault)
        try:
            back = flip(F, x, y)
        except NotFlippable:
            back = None
        if back != L:
            bad.append(f"(4) flip{(x, y)} is not an involution")
        if cs.same_cycle(x, y):
            continue
        fs = sigma_row_pair(F, 0, 1)
        cx, cy = frozenset(cs.cycle(x)), frozenset(cs.cycle(y))
        want = (_cycle_sets(cs) - {cx, cy}) | {cx | cy}
        if _cycle_sets(fs) != want:
            bad.append(f"(1) flip{(x, y)} did not merge exactly c_x and c_y")
        if len(cy) == 2 and fs.perm[fs.perm[x]] != y:
            bad.append(f"(5) flip{(x, y)}: sigma'^2({x}) != {y}")
    return bad


def check_join_rules(L: LatinSquare, fault=None) -> list[str]:
    """Single/double join effects and the exact single-join choice count."""
    bad: list[str] = []
    n = L.n
    cs = sigma_row_pair(L, 0, 1)
    s = cs.count(2)
    singles = enumerate_single_joins(L)
    if len(singles) != 2 * s * (n - 2 * s):
        bad.append(f"(3) {len(singles)} single joins, expected {2 * s * (n - 2 * s)}")
    for choice, R in singles:
        validate(R, f"join{(choice.x, choice.y)}", bad, fault)
        rs = sigma_row_pair(R, 0, 1)
        if rs.count(2) != s - 1:
            bad.append(f"(1) single join {choice} left {rs.count(2)} 2-cycles")
        if rs.length_of(choice.x) <= 4:
            bad.append(f"(1) single join {choice} merged cycle has length {rs.length_of(choice.x)}")
        if rs.perm[rs.perm[choice.x]] != choice.y:
            bad.append(f"(5) single join {choice}: sigma'^2(x) != y")
    doubles = enumerate_double_joins(L)
    for choice, R in doubles:
        validate(R, f"join{(choice.x, choice.y)}", bad, fault)
        rs = sigma_row_pair(R, 0, 1)
        if rs.count(2) != s - 2:
            bad.append(f"(2) double join {choice} left {rs.count(2)} 2-cycles")
        if rs.length_of(choice.x) != 4:
            bad.append(f"(2) double join {choice} merged cycle has length {rs.length_of(choice.x)}")
    if s >= 2:
        distinct = len({R for _, R in doubles})
        if distinct < 2 * (s - 2) ** 2:
            bad.append(f"(4) only {distinct} distinct double-join results")
    return bad


def _targeted_choice(R: LatinRectangle, rng: RawStream):
    """A twist proposal whose result is always column-Latin, or None.

    Picks i, j, x, x' at random (z, z' are then forced) and draws y, y'
    among the columns where the rotated symbols are still free.
    """
    k, n = R.k, R.n
    i = rng.below(k)
    j = rng.below(k - 1)
    j += j >= i
    x = rng.below(n)
    x2 = rng.below(n - 1)
    x2 += x2 >= x
    cells = R.cells
    z2 = int(R.col_of[i, cells[j, x]])
    z = int(R.col_of[i, cells[j, x2]])
    if len({x, x2, z, z2}) != 4:
        return None
    others = np.delete(cells, i, axis=0)
    present = np.zeros((n, n), dtype=bool)  # present[column, symbol]
    present[np.tile(np.arange(n), k - 1), others.reshape(-1)] = True
    row = cells[i]
    if present[x, row[z]] or present[x2, row[z2]]:
        return None
    free = np.ones(n, dtype=bool)
    free[[x, x2, z, z2]] = False
    ys = np.flatnonzero(free & ~present[:, row[x]] & ~present[z, row])
    y2s = np.flatnonzero(free & ~present[:, row[x2]] & ~present[z2, row])
    pairs = [(a, b) for a in ys for b in y2s if a != b]
    if not pairs:
        return None
    y, y2 = pairs[rng.below(len(pairs))]
    return propose_twist(R, i, j, x, x2, int(y), int(y2))


def random_twist_trial(R: LatinRectangle, cap: int, rng: RawStream, targeted: bool = False):
    """Propose one random twist aimed at a new intercalate and try it.

    ``targeted`` restricts proposals to column-Latin ones (see
    :func:`_targeted_choice`); a targeted draw that finds no candidate
    returns choice None.  Returns (choice, result or None, TwistInvalid
    or None, violations).
    """
    k, n = R.k, R.n
    if targeted:
        choice = _targeted_choice(R, rng)
        if choice is None:
            return None, None, None, []
    else:
        i = rng.below(k)
        j = rng.below(k - 1)
        j += j >= i
        cols = rng.sample(n, 4)
        order = rng.permutation(4)
        x, x2, y, y2 = (cols[t] for t in order)
        choice = propose_twist(R, i, j, x, x2, y, y2)
    bad: list[str] = []
    try:
        out = check_twist(R, choice, cap)
    except TwistInvalid as exc:
        if exc.bullet not in (0, 1, 2, 3) or (targeted and exc.reason == "latin"):
            bad.append(f"rejection without a condition: {exc}")
        return choice, None, exc, bad
    before, after = census(R), census(out)
    if after.total != before.total + 1:
        bad.append(f"twist {choice} changed N by {after.total - before.total}")
    if after.max_row > cap:
        bad.append(f"twist {choice} broke goodness")
    validate(out, f"twist{choice}", bad)
    return choice, out, None, bad


@dataclass
class JoinCounts:
    """Single-join double count for one order n (all integers exact).

    For each s: ``forward_choices[s]`` counts (square in L(s+1), choice)
    pairs, ``forward_pairs[s]`` counts distinct (square, result) pairs and
    ``backward_pairs[s]`` the same pairs found from the L(s) side by
    predecessor enumeration; ``max_pred[s]`` is the largest predecessor
    set of any square in L(s).
    """

    n: int
    class_sizes: dict[int, int] = field(default_factory=dict)
    forward_choices: dict[int, int] = field(default_factory=dict)
    forward_pairs: dict[int, int] = field(default_factory=dict)
    backward_pairs: dict[int, int] = field(default_factory=dict)
    max_pred: dict[int, int] = field(default_factory=dict)
    max_double_pred: dict[int, int] = field(default_factory=dict)
    double_pred_bound_ok: bool = True


def _add(d, key, v):
    d[key] = d.get(key, 0) + v


def join_counts(n: int) -> JoinCounts:
    """Enumerate every square (first row fixed, scaled by n!) and count joins
    both ways.  Symbol relabelling commutes with join and fixes N_2, so the
    scaling is exact."""
    from .oracle import enumerate_squares

    res = enumerate_squares(n, collect=True, reduced=True)
    f = factorial(n)
    out = JoinCounts(n, dict(res.class_sizes))
    for cells in res.squares:
        L = LatinSquare(cells.astype(np.intp), validate=False)
        cs = sigma_row_pair(L, 0, 1)
        s = cs.count(2)
        if s >= 1:
            singles = enumerate_single_joins(L)
            _add(out.forward_choices, s - 1, len(singles) * f)
            _add(out.forward_pairs, s - 1, len({R for _, R in singles}) * f)
        pred = single_join_predecessors(L)
        _add(out.backward_pairs, s, len(pred) * f)
        out.max_pred[s] = max(out.max_pred.get(s, 0), len(pred))
        dpred = double_join_predecessors(L)
        out.max_double_pred[s] = max(out.max_double_pred.get(s, 0), len(dpred))
        if len(dpred) > 2 * 4 * cs.count(4):
            out.double_pred_bound_ok = False
    return out


def find_intercalate_free(n: int, seed: int, budget: int = 10**7, beta: float = 1.0):
    """Look for an n x n square with no intercalates.

    Metropolis descent on N: from the current square, run the chain to its
    next proper state and accept with probability min(1, exp(-beta * dN)).
    The search starts from the chain after ``n**3`` burn-in moves (odd
    cyclic squares are already intercalate-free).  Returns (square or
    None, moves used including burn-in).
    """
    state = ChainState(cyclic_square(n), seed)
    rng = RawStream(seed ^ 0x5EED)
    state.advance(n**3)
    while not state.proper:
        state.advance(1)
    used = state.step_count
    cur = _chain.intercalates_of(state.cells())
    while used < budget:
        if cur == 0:
            return state.square(), used
        cube, st = state.cube.copy(), state.st.copy()
        while True:
            state.advance(1)
            used += 1
            if state.proper:
                break
        new = _chain.intercalates_of(state.cells())
        if new <= cur or rng.below(1 << 30) < (1 << 30) * math.exp(-beta * (new - cur)):
            cur = new
        else:
            state.cube[...] = cube
            state.st[...] = st
    return None, used
