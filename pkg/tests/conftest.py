import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from latinlab import LatinSquare, make_rectangle
from latinlab.oracle import enumerate_squares
from latinlab.sampler import SampleConfig, sample_list

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def sq(rows):
    """Square or rectangle from 1-based rows."""
    return make_rectangle(np.array(rows) - 1)


def completions(first_two, partial):
    """All 5x5 squares with the given first two rows whose remaining cells
    agree with ``partial`` (dict (row, col) -> symbol, 1-based)."""
    reps = enumerate_squares(5, collect=True, reduced=True).squares
    perm = np.array(first_two[0]) - 1
    out = []
    for R in reps:
        cells = perm[R.astype(np.intp)]
        for order in itertools.permutations(range(1, 5)):
            M = cells[[0, *order]]
            if list(M[1] + 1) != list(first_two[1]):
                continue
            if all(M[r - 1, c - 1] + 1 == v for (r, c), v in partial.items()):
                out.append(LatinSquare(M))
    return out


@pytest.fixture(scope="session")
def turn_example():
    """A 5x5 square whose first two rows have sigma cycles (1 4 5)(2 3)."""
    found = completions([(1, 5, 3, 4, 2), (4, 3, 5, 2, 1)],
                        {(3, 1): 2, (3, 3): 4, (4, 1): 3, (4, 3): 2, (5, 1): 5, (5, 3): 1})
    assert found
    return found[0]


@pytest.fixture(scope="session")
def flip_example():
    """A 5x5 square with a flippable column pair."""
    found = completions([(1, 3, 5, 4, 2), (4, 5, 3, 2, 1)],
                        {(3, 1): 2, (3, 3): 4, (4, 1): 3, (4, 3): 2, (5, 1): 5, (5, 3): 1})
    assert found
    return found[0]


TWIST_TOP = (1, 3, 5, 4, 2, 6)


@pytest.fixture(scope="session")
def twist_example():
    """A 2x6 twist example: row 2 completed (2, 3 in columns 3, 4) so that
    both rotations stay Latin and an intercalate appears on columns 3, 4."""
    from latinlab import census
    from latinlab.switchings import rotate

    for p in itertools.permutations(range(1, 7)):
        if p[2] != 2 or p[3] != 3 or any(a == b for a, b in zip(p, TWIST_TOP)):
            continue
        R = sq([TWIST_TOP, p])
        raw = rotate(R, 0, (3, 5, 4))
        if not raw.is_latin:
            continue
        raw = rotate(raw.to_rectangle(), 0, (2, 0, 1))
        if not raw.is_latin:
            continue
        cols = {w.cols for w in census(raw.to_rectangle(), with_witnesses=True).witnesses}
        if (2, 3) in cols:
            return R
    raise AssertionError("no completion of the twist example")


@pytest.fixture(scope="session")
def all_squares4():
    return enumerate_squares(4, collect=True).squares


@pytest.fixture(scope="session")
def reduced5():
    return enumerate_squares(5, collect=True, reduced=True).squares


def chain_squares(n, count, seed, thin=None):
    return sample_list(SampleConfig(n, seed=seed, thinning=thin or n * n, sample_count=count))


@st.composite
def squares(draw, min_n=2, max_n=9):
    """Chain-sampled squares of random order, reproducible from the drawn seed."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return chain_squares(n, 1, seed, thin=n**3)[0]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
