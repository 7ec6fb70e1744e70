"""Approximately uniform random Latin squares.

The chain works on the n x n x n zero-one incidence cube and allows one
entry to drop to -1 ("improper" states).  Each move adds +1/-1 around a
2x2x2 sub-cube, so every line sum stays 1; restricted to proper states
its stationary law is uniform.  How fast it mixes is not known, so burn-in
and thinning are plain knobs (default n^3 moves each).

Samples are read at fixed move counts ``burn_in + t * thinning``; a
checkpoint that lands on an improper state is skipped rather than
waiting for the next proper one, which keeps each emitted square
exactly stationary-uniform.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from math import factorial
from typing import Iterator

import numpy as np

from . import _chain
from .core import LatinSquare, cyclic_square
from .errors import ResourceError
from .rng import RNG_ID, RawStream

__all__ = [
    "RNG_ID",
    "ChainState",
    "SampleConfig",
    "chain_step",
    "sample",
    "sample_list",
    "sample_exact_small",
    "autocorrelation",
]

RELEASE_CHECK_EVERY = 1 << 16
EXACT_LIMIT = 5


class ChainState:
    """A running chain: incidence cube, improper-cell record, RNG and move count.

    Only proper states can be turned into squares; :meth:`square` refuses
    otherwise, so improper arrays never leave this module.
    """

    def __init__(self, start: LatinSquare, seed: int, debug: bool = False):
        n = start.n
        self.n = n
        self.cube = np.zeros((n, n, n), dtype=np.int8)
        i, x = np.indices((n, n))
        self.cube[i, x, start.cells] = 1
        self.st = np.array([1, 0, 0, 0, 0], dtype=np.int64)
        self.rng = RawStream(seed)
        self.seed = seed
        self.check_every = 1 if debug else RELEASE_CHECK_EVERY

    @property
    def proper(self) -> bool:
        return bool(self.st[0])

    @property
    def step_count(self) -> int:
        return int(self.st[4])

    def improper_cell(self):
        return None if self.proper else tuple(int(v) for v in self.st[1:4])

    def advance(self, moves: int) -> None:
        left = moves
        while left > 0:
            batch = min(left, 1 << 20)
            buf = self.rng.words(3 * batch + 2 * _chain.STEP_RESERVE)
            done, pos, ok = _chain.run_steps(self.cube, self.st, buf, 0, batch, self.check_every)
            self.rng.push_back(buf[pos:])
            if not ok:
                raise AssertionError(f"chain invariant broken at move {self.step_count}")
            left -= done

    def check(self) -> bool:
        return bool(_chain.check_cube(self.cube, self.st))

    def cells(self) -> np.ndarray:
        if not self.proper:
            raise ValueError("improper state has no square")
        return _chain.cube_to_cells(self.cube)

    def square(self) -> LatinSquare:
        return LatinSquare(self.cells())


def chain_step(state: ChainState) -> ChainState:
    """Apply one move in place and return the state."""
    state.advance(1)
    return state


@dataclass(frozen=True)
class SampleConfig:
    n: int
    seed: int = 0
    burn_in: int | None = None
    thinning: int | None = None
    sample_count: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        for name in ("burn_in", "thinning"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.sample_count < 0 or self.workers < 1:
            raise ValueError("sample_count >= 0 and workers >= 1 required")

    @property
    def burn(self) -> int:
        return self.n**3 if self.burn_in is None else self.burn_in

    @property
    def thin(self) -> int:
        return self.n**3 if self.thinning is None else self.thinning


def _chain_samples(n, seed, burn, thin, count, start=None, raw=False):
    state = ChainState(start if start is not None else cyclic_square(n), seed)
    state.advance(burn)
    emitted = 0
    while emitted < count:
        if state.proper:
            cells = state.cells()
            yield cells if raw else LatinSquare(cells)
            emitted += 1
        state.advance(max(thin, 1))
    if state.step_count % RELEASE_CHECK_EVERY and not state.check():
        raise AssertionError("chain invariant broken")


def _worker_counts(total: int, workers: int) -> list[int]:
    return [total // workers + (w < total % workers) for w in range(workers)]


def _worker_job(args):
    n, seed, burn, thin, count = args
    return list(_chain_samples(n, seed, burn, thin, count, raw=True))


def sample(config: SampleConfig, start: LatinSquare | None = None) -> Iterator[LatinSquare]:
    """Stream ``sample_count`` squares; identical config gives identical output.

    With several workers, worker ``w`` runs its own chain from seed
    ``seed + w`` and the output lists worker 0's samples first.
    """
    if config.workers == 1:
        yield from _chain_samples(config.n, config.seed, config.burn, config.thin,
                                  config.sample_count, start)
        return
    jobs = [(config.n, config.seed + w, config.burn, config.thin, c)
            for w, c in enumerate(_worker_counts(config.sample_count, config.workers))]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        for batch in pool.map(_worker_job, jobs):
            for cells in batch:
                yield LatinSquare(cells)


def sample_list(config: SampleConfig) -> list[LatinSquare]:
    return list(sample(config))


def raw_samples(config: SampleConfig) -> Iterator[np.ndarray]:
    """Like :func:`sample` but yields unvalidated int arrays (single chain)."""
    return _chain_samples(config.n, config.seed, config.burn, config.thin,
                          config.sample_count, raw=True)


def _reduced_squares(n: int) -> np.ndarray:
    from .oracle import enumerate_squares

    return enumerate_squares(n, collect=True, reduced=True).squares


def sample_exact_small(n: int, count: int, seed: int, limit: int = EXACT_LIMIT) -> Iterator[LatinSquare]:
    """Exactly uniform squares for tiny n.

    Index t in [0, |L_n|) names the reduced square t // n! (first row the
    identity) with its symbols renamed by the (t mod n!)-th permutation in
    lexicographic order; this indexes every square exactly once.
    """
    if n > limit:
        raise ResourceError(f"exact sampling limited to n <= {limit}")
    reps = _reduced_squares(n)
    perms = np.array(list(permutations(range(n))), dtype=np.intp)
    f = factorial(n)
    total = len(reps) * f
    rng = RawStream(seed)
    for _ in range(count):
        t = rng.below(total)
        rep, p = divmod(t, f)
        yield LatinSquare(perms[p][reps[rep].astype(np.intp)])


def autocorrelation(values, max_lag: int) -> list[float]:
    """Sample autocorrelation of a statistic along a chain, lags 0..max_lag."""
    v = np.asarray(values, dtype=float)
    v = v - v.mean()
    denom = float((v * v).sum())
    if denom == 0:
        return [1.0] + [0.0] * max_lag
    return [float((v[: len(v) - h] * v[h:]).sum() / denom) for h in range(max_lag + 1)]
