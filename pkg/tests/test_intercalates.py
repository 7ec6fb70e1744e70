import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latinlab import ResourceError, census, cyclic_square, intercalate_count, sigma_row_pair, subsquare_count
from latinlab.intercalates import (
    Intercalate,
    cell_intercalates,
    count_two_rows,
    row_involvement,
)

from conftest import sq, squares

EXAMPLE_ROWS = [[1, 5, 3, 4, 2], [4, 3, 5, 2, 1]]


def brute_force(L):
    """Quadruple scan over row pairs and column pairs."""
    out = set()
    for i, j in itertools.combinations(range(L.k), 2):
        for x, y in itertools.combinations(range(L.n), 2):
            if L[i, x] == L[j, y] and L[i, y] == L[j, x]:
                out.add(((i, j), (x, y)))
    return out


def test_two_rows_worked_example():
    assert count_two_rows(sq(EXAMPLE_ROWS), 0, 1) == 1


def test_two_rows_small_cases():
    assert count_two_rows(sq([[1, 2], [2, 1]]), 0, 1) == 1
    C = cyclic_square(3)
    assert all(count_two_rows(C, i, j) == 0 for i, j in itertools.permutations(range(3), 2))


def test_two_rows_bad_index():
    with pytest.raises(IndexError):
        count_two_rows(cyclic_square(3), 1, 1)


def test_cyclic_four_witnesses():
    c = census(cyclic_square(4), with_witnesses=True)
    assert c.total == 4
    got = {(w.rows, w.cols) for w in c.witnesses}
    assert got == {(r, x) for r in ((0, 2), (1, 3)) for x in ((0, 2), (1, 3))}


def test_small_totals():
    assert census(sq([[1, 2], [2, 1]])).total == 1
    assert census(cyclic_square(5)).total == 0


def test_witness_validation():
    L = cyclic_square(4)
    w = Intercalate.at(L, 2, 0, 2, 0)
    assert w.rows == (0, 2) and w.cols == (0, 2)
    assert len(w.cells()) == 4
    with pytest.raises(ValueError):
        Intercalate.at(L, 0, 1, 0, 1)


@given(squares(max_n=8))
def test_census_matches_brute_force(L):
    c = census(L, with_witnesses=True)
    found = brute_force(L)
    assert c.total == len(found) == intercalate_count(L)
    assert {(w.rows, w.cols) for w in c.witnesses} == found
    assert 2 * c.total == sum(c.per_row)
    assert sum(c.per_row_pair.values()) == c.total
    assert 0 <= c.total <= L.n**3 / 4
    for (i, j), v in c.per_row_pair.items():
        assert v == sigma_row_pair(L, i, j).count(2) == count_two_rows(L, i, j)
    assert sum(c.pair_histogram().values()) == L.n * (L.n - 1) // 2
    assert row_involvement(L) == c.per_row


@given(squares(max_n=8), st.integers(0, 2**31))
def test_census_symmetries(L, seed):
    rng = np.random.default_rng(seed)
    total = census(L).total
    assert census(L.transpose()).total == total
    assert census(L.permute_rows(rng.permutation(L.n))).total == total
    assert census(L.relabel(rng.permutation(L.n))).total == total


@given(squares(max_n=7))
def test_cell_intercalates(L):
    c = census(L, with_witnesses=True)
    for w in c.witnesses:
        i, j = w.rows
        x, y = w.cols
        assert (j, y) in cell_intercalates(L, i, x)
    assert sum(len(cell_intercalates(L, i, x)) for i in range(L.n) for x in range(L.n)) == 4 * c.total


def test_rectangle_census():
    R = sq(EXAMPLE_ROWS)
    assert census(R).total == 1
    assert census(R).max_row == 1


class TestSubsquares:
    @given(squares(max_n=7))
    def test_order_two_is_census(self, L):
        assert subsquare_count(L, 2) == census(L).total

    def test_cyclic_four(self):
        L = cyclic_square(4)
        assert subsquare_count(L, 4) == 1
        assert subsquare_count(L, 3) == 0

    def brute(self, L, m):
        n = L.n
        cnt = 0
        for R in itertools.combinations(range(n), m):
            for C in itertools.combinations(range(n), m):
                sub = L.cells[np.ix_(R, C)]
                if len(set(sub.ravel().tolist())) == m:
                    cnt += 1
        return cnt

    @given(squares(min_n=3, max_n=6), st.integers(3, 4))
    def test_matches_brute_force(self, L, m):
        if m <= L.n:
            assert subsquare_count(L, m) == self.brute(L, m)

    def test_cyclic_six_order_three(self):
        L = cyclic_square(6)
        assert subsquare_count(L, 3) == self.brute(L, 3)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            subsquare_count(cyclic_square(3), 4)

    def test_budget(self):
        with pytest.raises(ResourceError):
            subsquare_count(cyclic_square(8), 4, budget=5)
