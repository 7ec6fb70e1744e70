"""Box statistics, symbol-class bipartite graphs, covering families and
permanent-based counting bounds.

Every bound is computed as a natural logarithm via ``math.lgamma`` so
nothing overflows; comparisons use an absolute log-space tolerance of
``LOG_TOL``.  The box-discrepancy scale is
``sqrt(vol) * ln(n) + n * ln(n)**2``; no constant is attached to it, and
scans report deviation / scale ratios instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lgamma, log, sqrt

import numpy as np

from .core import Box, LatinSquare, incidence_count
from .rng import RawStream, derive_seed

__all__ = [
    "LOG_TOL",
    "BOX_CSV_COLUMNS",
    "BoxStat",
    "QGraph",
    "CoverFamily",
    "STRATEGIES",
    "q_graph",
    "box_bound",
    "box_stat",
    "random_box",
    "box_scan",
    "max_ratio",
    "build_cover",
    "bregman_upper",
    "vdw_lower",
    "factorization_bounds",
    "or_lower_bound",
    "or_lower_bound_exact",
    "regular_probability_report",
    "permanent_sandwich",
]

LOG_TOL = 1e-9
BOX_CSV_COLUMNS = ["n", "I", "X", "Q", "vol", "observed", "expected", "deviation",
                   "bound", "ratio", "seed", "strategy"]
STRATEGIES = ("uniform-element", "size-grid", "structured-intervals")


def box_bound(vol: int, n: int) -> float:
    """sqrt(vol) ln n + n ln^2 n (natural logarithm)."""
    ln = log(n) if n > 1 else 0.0
    return sqrt(vol) * ln + n * ln * ln


@dataclass(frozen=True)
class BoxStat:
    box: Box
    n: int
    observed: int

    @property
    def vol(self) -> int:
        return self.box.vol

    @property
    def expected(self) -> float:
        return self.vol / self.n

    @property
    def deviation(self) -> float:
        # exact rational difference, rounded once
        return float(abs(Fraction(self.observed) - Fraction(self.vol, self.n)))

    @property
    def bound(self) -> float:
        return box_bound(self.vol, self.n)

    @property
    def ratio(self) -> float:
        b = self.bound
        if b == 0:
            return 0.0 if self.deviation == 0 else math.inf
        return self.deviation / b

    def row(self, seed=None, strategy="") -> dict:
        a, b, c = self.box.sizes()
        return {"n": self.n, "I": a, "X": b, "Q": c, "vol": self.vol,
                "observed": self.observed, "expected": self.expected,
                "deviation": self.deviation, "bound": self.bound,
                "ratio": self.ratio, "seed": seed, "strategy": strategy}


def box_stat(L: LatinSquare, box: Box) -> BoxStat:
    return BoxStat(box, L.n, incidence_count(L, box))


@dataclass(frozen=True)
class QGraph:
    """Rows joined to columns whose entry lies in a symbol set Q."""

    biadjacency: np.ndarray
    d: int

    def edges(self, rows, cols) -> int:
        """e(I, X): number of edges between row set I and column set X."""
        rows, cols = list(rows), list(cols)
        if not rows or not cols:
            return 0
        return int(self.biadjacency[np.ix_(rows, cols)].sum())

    def is_regular(self) -> bool:
        B = self.biadjacency
        return bool((B.sum(axis=0) == self.d).all() and (B.sum(axis=1) == self.d).all())


def q_graph(L: LatinSquare, symbols) -> QGraph:
    mask = np.zeros(L.n, dtype=bool)
    sym = sorted(set(int(q) for q in symbols))
    if sym and (sym[0] < 0 or sym[-1] >= L.n):
        raise ValueError(f"symbols must lie in 0..{L.n - 1}")
    mask[sym] = True
    B = mask[L.cells].astype(np.int8)
    B.setflags(write=False)
    return QGraph(B, len(sym))


# -- box scans ---------------------------------------------------------------


def _geometric_grid(n: int) -> list[int]:
    grid = []
    s = 1
    while s < n:
        grid.append(s)
        s *= 2
    grid.append(n)
    return grid


def random_box(n: int, strategy: str, rng: RawStream) -> Box:
    """One random box under the named strategy.

    uniform-element: each row, column and symbol kept with probability 1/2.
    size-grid: |I|, |X|, |Q| drawn from the powers of two below n (and n),
    then uniform subsets of those sizes.
    structured-intervals: three random contiguous index ranges.
    """
    if strategy == "uniform-element":
        bits = rng.coins(3 * n).reshape(3, n)
        return Box(*(np.flatnonzero(b) for b in bits))
    if strategy == "size-grid":
        grid = _geometric_grid(n)
        return Box(*(rng.sample(n, grid[rng.below(len(grid))]) for _ in range(3)))
    if strategy == "structured-intervals":
        parts = []
        for _ in range(3):
            length = 1 + rng.below(n)
            start = rng.below(n - length + 1)
            parts.append(range(start, start + length))
        return Box(*parts)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def box_scan(L: LatinSquare, strategy: str, count: int, seed: int) -> list[BoxStat]:
    """``count`` random boxes; box t uses its own stream derived from (seed, t)."""
    return [box_stat(L, random_box(L.n, strategy, RawStream(derive_seed(seed, t))))
            for t in range(count)]


def max_ratio(stats) -> float:
    return max((s.ratio for s in stats), default=0.0)


# -- covering families -------------------------------------------------------


@dataclass
class CoverFamily:
    n: int
    k: int
    M: int
    sets: np.ndarray  # (M, k) sorted row indices
    coverage: np.ndarray  # (n, n) pair coverage counts, symmetric

    def pair_counts(self) -> np.ndarray:
        iu = np.triu_indices(self.n, 1)
        return self.coverage[iu]

    def histogram(self) -> dict[int, int]:
        vals, cnts = np.unique(self.pair_counts(), return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnts)}

    @property
    def center(self) -> float:
        return self.M * (self.k / self.n) ** 2

    @property
    def exact_mean(self) -> float:
        """M times the exact probability k(k-1)/(n(n-1)) that a set holds a pair."""
        return self.M * self.k * (self.k - 1) / (self.n * (self.n - 1))

    @property
    def band_width(self) -> float:
        n, k, M = self.n, self.k, self.M
        return 5 * (log(n) / (sqrt(M) * k / n) + k / n)

    @property
    def band(self) -> tuple[float, float]:
        w = self.band_width
        return self.center * (1 - w), self.center * (1 + w)

    @property
    def regime_ratio(self) -> float:
        """M / (n ln n / k)^2; the construction is only meant for M >> that."""
        n, k = self.n, self.k
        return self.M / (n * log(n) / k) ** 2

    @property
    def in_regime(self) -> bool:
        return self.regime_ratio >= 10

    def within_band(self) -> bool:
        pc = self.pair_counts()
        if len(pc) == 0:
            return True
        lo, hi = self.band
        return bool(pc.min() >= lo and pc.max() <= hi)

    def report(self) -> dict:
        pc = self.pair_counts()
        lo, hi = self.band
        return {"n": self.n, "k": self.k, "M": self.M,
                "min_coverage": int(pc.min()) if len(pc) else 0,
                "max_coverage": int(pc.max()) if len(pc) else 0,
                "center": self.center, "exact_mean": self.exact_mean,
                "band_lo": lo, "band_hi": hi, "within_band": self.within_band(),
                "regime_ratio": self.regime_ratio,
                "label": "in-regime" if self.in_regime else "advisory"}


def build_cover(n: int, k: int, M: int, seed: int) -> CoverFamily:
    """M independent uniform k-subsets of range(n) with exact pair coverage."""
    if not 1 <= k <= n or M < 1:
        raise ValueError("need 1 <= k <= n and M >= 1")
    rng = RawStream(seed)
    sets = np.array([rng.sample(n, k) for _ in range(M)], dtype=np.intp).reshape(M, k)
    B = np.zeros((M, n), dtype=np.int32)
    B[np.arange(M)[:, None], sets] = 1
    coverage = B.T @ B
    return CoverFamily(n, k, M, sets, coverage)


# -- permanent and counting bounds -------------------------------------------


def _check_dn(d: int, n: int) -> None:
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")


def bregman_upper(d: int, n: int) -> float:
    """log of (d!)^(n/d), the upper bound on perfect matchings of a
    d-regular bipartite graph; 0 for d = 0."""
    _check_dn(d, n)
    return 0.0 if d == 0 else (n / d) * lgamma(d + 1)


def vdw_lower(d: int, n: int) -> float:
    """log of n! (d/n)^n, the matching lower bound; 0 for d = 0."""
    _check_dn(d, n)
    return 0.0 if d == 0 else lgamma(n + 1) + n * log(d / n)


def factorization_bounds(d: int, n: int) -> tuple[float, float, float]:
    """Log bounds on the number of ordered 1-factorizations of a d-regular
    bipartite graph, from picking factors one at a time.

    Returns (lower, upper, c) with upper - lower = c * n * (ln^2 d + 1).
    """
    _check_dn(d, n)
    lower = sum(vdw_lower(t, n) for t in range(1, d + 1))
    upper = sum(bregman_upper(t, n) for t in range(1, d + 1))
    scale = n * (log(d) ** 2 + 1) if d else 1.0
    return lower, upper, (upper - lower) / scale


def _xlogx(a: int, n: int) -> float:
    return 0.0 if a == 0 else (a / n) * log(a / n)


def or_lower_bound(d: int, n: int) -> float:
    """log of C(n,d)^(2n) (p^p (1-p)^(1-p))^(n^2) with p = d/n."""
    _check_dn(d, n)
    return 2 * n * log(comb(n, d)) + n * n * (_xlogx(d, n) + _xlogx(n - d, n))


def or_lower_bound_exact(d: int, n: int) -> Fraction:
    """The same bound as an exact rational: p n^2 = d n is an integer."""
    _check_dn(d, n)
    return (Fraction(comb(n, d)) ** (2 * n) * Fraction(d, n) ** (d * n)
            * Fraction(n - d, n) ** ((n - d) * n))


def regular_probability_report(n: int, d: int) -> dict:
    """Exact |G_d| against the lower bound, and the exact probability that the
    bipartite binomial graph with p = d/n is d-regular."""
    from .oracle import enumerate_regular_bipartite

    exact = enumerate_regular_bipartite(n, d)
    bound = or_lower_bound_exact(d, n)
    p = Fraction(d, n)
    prob = exact * p ** (d * n) * (1 - p) ** (n * n - d * n)
    return {"n": n, "d": d, "exact": exact, "log_exact": log(exact),
            "log_bound": or_lower_bound(d, n), "bound": float(bound),
            "satisfied": exact >= bound, "prob_regular": prob,
            "log_prob_regular": log(prob) if prob else -math.inf}


def permanent_sandwich(B) -> dict:
    """vdw_lower <= log(per B) <= bregman_upper for a d-regular 0/1 matrix."""
    from .oracle import exact_permanent

    B = np.asarray(B)
    n = B.shape[0]
    d = int(B.sum(axis=1)[0]) if n else 0
    per = exact_permanent(B).value
    lp = log(per) if per else -math.inf
    lo, hi = vdw_lower(d, n), bregman_upper(d, n)
    return {"n": n, "d": d, "permanent": per, "log_perm": lp, "vdw": lo, "bregman": hi,
            "ok": lo <= lp + LOG_TOL and lp <= hi + LOG_TOL}
