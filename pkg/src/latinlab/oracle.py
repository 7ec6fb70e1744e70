"""Exact ground truth by exhaustive search.

Latin squares and rectangles are enumerated row by row: each row is an
index into the lexicographic list of permutations of ``0..n-1`` and the
rows still compatible with a partial rectangle are tracked as an int
bitmask over that list.  All counts are exact Python integers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial
from typing import Callable, Iterator

import numpy as np

from .budget import node_budget
from .errors import ResourceError

__all__ = [
    "EnumerationResult",
    "PermanentResult",
    "CHECKPOINT_VERSION",
    "enumerate_squares",
    "enumerate_rectangles",
    "iter_squares",
    "exact_permanent",
    "naive_permanent",
    "perfect_matchings",
    "count_one_factorizations",
    "regular_bipartite_graphs",
    "enumerate_regular_bipartite",
]

CHECKPOINT_VERSION = 1
SQUARE_LIMIT = 5
LONG_RUN_LIMIT = 6


@dataclass
class EnumerationResult:
    """Exact counts over all k x n Latin rectangles (k = n for squares).

    ``n_histogram`` maps intercalate count -> number of arrays and
    ``class_sizes`` maps s -> number with s intercalates in rows 0, 1.
    """

    n: int
    k: int
    total_count: int
    n_histogram: dict[int, int]
    class_sizes: dict[int, int] = field(default_factory=dict)
    squares: np.ndarray | None = None
    reduced: bool = False

    def mean_intercalates(self) -> Fraction:
        return Fraction(sum(c * m for c, m in self.n_histogram.items()), self.total_count)

    def mean_two_row(self) -> Fraction:
        """Exact E[N_2] for the first two rows."""
        return Fraction(sum(s * m for s, m in self.class_sizes.items()), self.total_count)

    def variance_intercalates(self) -> Fraction:
        mean = self.mean_intercalates()
        second = Fraction(sum(c * c * m for c, m in self.n_histogram.items()), self.total_count)
        return second - mean * mean


@lru_cache(maxsize=None)
def _tables(n: int):
    """Permutation list, compatibility bitmasks and two-row intercalate counts."""
    perms = list(permutations(range(n)))
    index = {p: t for t, p in enumerate(perms)}
    inv = [tuple(np.argsort(p)) for p in perms]
    compat = []
    two: list[dict[int, int]] = []
    for a, p in enumerate(perms):
        mask = 0
        row: dict[int, int] = {}
        for b, q in enumerate(perms):
            if all(p[x] != q[x] for x in range(n)):
                mask |= 1 << b
                sig = [inv[a][q[x]] for x in range(n)]
                row[b] = sum(1 for x in range(n) if sig[sig[x]] == x) // 2
        compat.append(mask)
        two.append(row)
    return perms, index, compat, two


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _prefixes(n: int, reduced: bool) -> list[tuple[int, int]]:
    """Ordered (row0, row1) permutation-index prefixes, the unit of work."""
    _, _, compat, _ = _tables(n)
    firsts = [0] if reduced else range(len(compat))
    return [(a, b) for a in firsts for b in _bits(compat[a])]


def _run_prefix(n: int, k: int, prefix: tuple[int, int], callback=None, budget=None):
    """Exhaust all completions of a two-row prefix to k rows.

    Returns (count, n_histogram, class_sizes, nodes).
    """
    perms, _, compat, two = _tables(n)
    a, b = prefix
    hist: dict[int, int] = {}
    s = two[a][b]
    rows = [a, b]
    count = 0
    nodes = 0

    def rec(depth: int, mask: int, N: int):
        nonlocal count, nodes
        if depth == k:
            count += 1
            hist[N] = hist.get(N, 0) + 1
            if callback is not None:
                callback([perms[r] for r in rows], N, s)
            return
        for q in _bits(mask):
            nodes += 1
            add = 0
            for r in rows:
                add += two[r][q]
            rows.append(q)
            rec(depth + 1, mask & compat[q], N + add)
            rows.pop()
        if budget is not None and nodes > budget:
            raise ResourceError(f"enumeration exceeded {budget} nodes")

    rec(2, compat[a] & compat[b], s)
    return count, hist, ({s: count} if count else {}), nodes


def _merge(into: dict[int, int], part: dict[int, int]) -> None:
    for key, v in part.items():
        into[key] = into.get(key, 0) + v


def _run_prefix_star(args):
    n, k, prefix = args
    return _run_prefix(n, k, prefix)


def _load_checkpoint(path, n, k, reduced):
    if path is None or not os.path.exists(path):
        return 0, 0, {}, {}
    with open(path) as fh:
        state = json.load(fh)
    if state.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {state.get('version')}")
    if (state["n"], state["k"], state["reduced"]) != (n, k, reduced):
        raise ValueError("checkpoint was written for a different enumeration")
    conv = lambda d: {int(key): int(v) for key, v in d.items()}  # noqa: E731
    return state["cursor"], state["total"], conv(state["hist"]), conv(state["class_sizes"])


def _save_checkpoint(path, n, k, reduced, cursor, total, hist, sizes):
    state = {
        "version": CHECKPOINT_VERSION,
        "n": n,
        "k": k,
        "reduced": reduced,
        "cursor": cursor,
        "total": total,
        "hist": {str(key): v for key, v in sorted(hist.items())},
        "class_sizes": {str(key): v for key, v in sorted(sizes.items())},
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(state, fh, indent=1)
    os.replace(tmp, path)


def _enumerate(n: int, k: int, *, reduced: bool, callback=None, workers: int = 1,
               checkpoint: str | None = None, checkpoint_every: int = 64,
               budget: int | None = None) -> EnumerationResult:
    if k == 1:
        total = factorial(n)
        return EnumerationResult(n, 1, total, {0: total}, {}, reduced=False)
    prefixes = _prefixes(n, reduced)
    cursor, total, hist, sizes = _load_checkpoint(checkpoint, n, k, reduced)
    if callback is not None and workers > 1:
        raise ValueError("callbacks require workers=1")
    nodes = 0
    if workers > 1:
        todo = [(n, k, p) for p in prefixes[cursor:]]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves submission order, so the merge is deterministic
            for cnt, h, cs, nd in pool.map(_run_prefix_star, todo, chunksize=16):
                total += cnt
                _merge(hist, h)
                _merge(sizes, cs)
                nodes += nd
        cursor = len(prefixes)
    else:
        for t in range(cursor, len(prefixes)):
            remaining = None if budget is None else budget - nodes
            cnt, h, cs, nd = _run_prefix(n, k, prefixes[t], callback, remaining)
            total += cnt
            _merge(hist, h)
            _merge(sizes, cs)
            nodes += nd
            if checkpoint is not None and (t + 1) % checkpoint_every == 0:
                _save_checkpoint(checkpoint, n, k, reduced, t + 1, total, hist, sizes)
        cursor = len(prefixes)
    if checkpoint is not None:
        _save_checkpoint(checkpoint, n, k, reduced, cursor, total, hist, sizes)
    if reduced:
        # symbol relabelling fixes N and N_2 and acts freely on first rows
        f = factorial(n)
        total *= f
        hist = {key: v * f for key, v in hist.items()}
        sizes = {key: v * f for key, v in sizes.items()}
    return EnumerationResult(n, k, total, dict(sorted(hist.items())),
                             dict(sorted(sizes.items())), reduced=reduced)


def enumerate_squares(n: int, callback: Callable | None = None, *, collect: bool = False,
                      reduced: bool = False, long_run: bool = False, workers: int = 1,
                      checkpoint: str | None = None) -> EnumerationResult:
    """Visit every n x n Latin square exactly once.

    ``callback(rows, N, s)`` receives each square as a list of row tuples
    (0-based symbols), its intercalate count and its rows-0,1 count.
    ``reduced=True`` fixes the first row to the identity and scales the
    counts by n!; the callback then only sees those representatives.
    n = 6 requires ``long_run=True`` and always runs reduced.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > LONG_RUN_LIMIT or (n > SQUARE_LIMIT and not long_run):
        raise ResourceError(f"square enumeration for n={n} is beyond the oracle limit")
    if n > SQUARE_LIMIT:
        reduced = True
    if n == 1:
        sq = np.zeros((1, 1, 1), dtype=np.int8) if collect else None
        if callback is not None:
            callback([(0,)], 0, 0)
        return EnumerationResult(1, 1, 1, {0: 1}, {0: 1}, sq)
    store = []
    cb = callback
    if collect:
        if n > SQUARE_LIMIT:
            raise ResourceError("collecting squares is limited to n <= 5")

        def collecting(rows, N, s):
            store.append(rows)
            if callback is not None:
                callback(rows, N, s)

        cb = collecting

    res = _enumerate(n, n, reduced=reduced, callback=cb, workers=workers, checkpoint=checkpoint)
    if collect:
        res.squares = np.array(store, dtype=np.int8)
    return res


def iter_squares(n: int, reduced: bool = False) -> Iterator[np.ndarray]:
    """Yield every square (or every reduced representative) as an int array."""
    res = enumerate_squares(n, collect=True, reduced=reduced)
    yield from res.squares


def enumerate_rectangles(k: int, n: int, budget: int | None = None,
                         reduced: bool = True) -> EnumerationResult:
    """Exact count and intercalate histogram over all k x n Latin rectangles.

    By default runs with the first row fixed and multiplies by n!, which
    is exact because symbol relabelling preserves every intercalate.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if n > LONG_RUN_LIMIT:
        raise ResourceError(f"rectangle enumeration for n={n} is beyond the oracle limit")
    if budget is None:
        budget = node_budget()
    return _enumerate(n, k, reduced=reduced, budget=budget)


# -- permanents and bipartite graphs -----------------------------------------


@dataclass(frozen=True)
class PermanentResult:
    dim: int
    value: int
    method: str


PERMANENT_LIMIT = 24


def exact_permanent(M) -> PermanentResult:
    """Ryser's inclusion-exclusion formula with Gray-code subset updates."""
    rows = [[int(v) for v in r] for r in np.asarray(M).tolist()] if len(M) else []
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("permanent needs a square matrix")
    if n > PERMANENT_LIMIT:
        raise ResourceError(f"permanent limited to dimension {PERMANENT_LIMIT}")
    if n == 0:
        return PermanentResult(0, 1, "ryser-gray")
    cols = [[rows[i][j] for i in range(n)] for j in range(n)]
    sums = [0] * n
    in_set = [False] * n
    total = 0
    size = 0
    for t in range(1, 1 << n):
        j = (t & -t).bit_length() - 1
        col = cols[j]
        if in_set[j]:
            in_set[j] = False
            size -= 1
            for i in range(n):
                sums[i] -= col[i]
        else:
            in_set[j] = True
            size += 1
            for i in range(n):
                sums[i] += col[i]
        prod = 1
        for v in sums:
            if v == 0:
                prod = 0
                break
            prod *= v
        total += -prod if size & 1 else prod
    if n & 1:
        total = -total
    return PermanentResult(n, total, "ryser-gray")


def naive_permanent(M) -> int:
    a = np.asarray(M).tolist()
    n = len(a)
    total = 0
    for p in permutations(range(n)):
        prod = 1
        for i in range(n):
            prod *= a[i][p[i]]
            if not prod:
                break
        total += prod
    return total


def perfect_matchings(B) -> list[tuple[int, ...]]:
    """All perfect matchings of a 0/1 biadjacency matrix as column tuples."""
    B = np.asarray(B, dtype=bool)
    n = B.shape[0]
    nbrs = [np.flatnonzero(B[i]).tolist() for i in range(n)]
    out = []
    used = [False] * n
    cur = []

    def rec(i):
        if i == n:
            out.append(tuple(cur))
            return
        for j in nbrs[i]:
            if not used[j]:
                used[j] = True
                cur.append(j)
                rec(i + 1)
                cur.pop()
                used[j] = False

    rec(0)
    return out


def count_one_factorizations(B) -> int:
    """Ordered 1-factorizations: sequences of disjoint perfect matchings covering B."""
    B = np.asarray(B, dtype=np.int8)

    @lru_cache(maxsize=None)
    def phi(key: bytes) -> int:
        G = np.frombuffer(key, dtype=np.int8).reshape(B.shape)
        if not G.any():
            return 1
        total = 0
        rows = np.arange(G.shape[0])
        for m in perfect_matchings(G):
            H = G.copy()
            H[rows, list(m)] = 0
            total += phi(H.tobytes())
        return total

    return phi(B.tobytes())


REGULAR_LIMIT = 4


def regular_bipartite_graphs(n: int, d: int) -> Iterator[np.ndarray]:
    """Every n x n 0/1 matrix with all row and column sums equal to d."""
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    row_choices = [sum(1 << c for c in comb) for comb in combinations(range(n), d)]
    colsum = [0] * n
    chosen = []

    def rec(i):
        if i == n:
            M = np.zeros((n, n), dtype=np.int8)
            for r, mask in enumerate(chosen):
                for c in range(n):
                    if mask >> c & 1:
                        M[r, c] = 1
            yield M
            return
        left = n - i - 1
        for mask in row_choices:
            ok = True
            for c in range(n):
                v = colsum[c] + (mask >> c & 1)
                if v > d or v + left < d:
                    ok = False
                    break
            if not ok:
                continue
            for c in range(n):
                colsum[c] += mask >> c & 1
            chosen.append(mask)
            yield from rec(i + 1)
            chosen.pop()
            for c in range(n):
                colsum[c] -= mask >> c & 1

    yield from rec(0)


def enumerate_regular_bipartite(n: int, d: int) -> int:
    """Exact number of d-regular bipartite graphs on [n] + [n]."""
    if n > REGULAR_LIMIT:
        raise ResourceError(f"regular bipartite enumeration limited to n <= {REGULAR_LIMIT}")
    return sum(1 for _ in regular_bipartite_graphs(n, d))
