import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latinlab import (
    Box,
    LatinRectangle,
    LatinSquare,
    RepeatError,
    ShapeError,
    SymbolError,
    cyclic_square,
    from_json,
    parse_rectangle,
    sigma_row_pair,
    tau_column_pair,
    to_json,
    to_text,
)
from latinlab.core import IncidenceView, cycle_structure, incidence_count

from conftest import sq, squares

TWO = [[1, 2], [2, 1]]


class TestParse:
    def test_smallest_square(self):
        L = parse_rectangle("2\n1 2\n2 1")
        assert isinstance(L, LatinSquare)
        assert L.rows() == TWO

    def test_worked_rows_rectangle(self):
        L = parse_rectangle(b"2 5\n1 5 3 4 2\n4 3 5 2 1\n")
        assert (L.k, L.n) == (2, 5)
        assert not L.is_square

    def test_column_repeat_names_column_one(self):
        with pytest.raises(RepeatError) as exc:
            parse_rectangle("2\n1 2\n1 2")
        assert exc.value.col == 0
        assert "(2, 1)" in str(exc.value)

    def test_row_repeat(self):
        with pytest.raises(RepeatError):
            parse_rectangle("2 3\n1 1 2\n2 3 1")

    @pytest.mark.parametrize("text", ["", "x\n1", "1 2 3\n1", "3 2\n1 2\n2 1\n1 2", "2\n1 2", "2\n1 2 3\n2 1"])
    def test_shape_errors(self, text):
        with pytest.raises(ShapeError):
            parse_rectangle(text)

    @pytest.mark.parametrize("text", ["2\n1 3\n2 1", "2\n0 1\n1 2", "2\n1 a\n2 1"])
    def test_symbol_errors(self, text):
        with pytest.raises(SymbolError) as exc:
            parse_rectangle(text)
        assert exc.value.row == 0

    def test_one_by_one(self):
        L = parse_rectangle("1\n1")
        assert L.n == 1 and L.rows() == [[1]]


class TestSerialization:
    def test_text_format_is_canonical(self):
        assert to_text(sq(TWO)) == "2\n1 2\n2 1\n"
        assert to_text(sq([[1, 2, 3]])) == "1 3\n1 2 3\n"

    def test_json_format(self):
        obj = json.loads(to_json(sq(TWO)))
        assert obj == {"n": 2, "k": 2, "rows": TWO}

    def test_json_shape_mismatch(self):
        with pytest.raises(ShapeError):
            from_json('{"n": 2, "k": 2, "rows": [[1, 2]]}')

    @given(squares())
    def test_round_trips(self, L):
        assert parse_rectangle(to_text(L)) == L
        assert from_json(to_json(L)) == L
        R = L.rectangle(max(1, L.n // 2))
        assert parse_rectangle(to_text(R)) == R


class TestLookups:
    @given(squares())
    def test_tables_agree_with_cells(self, L):
        n = L.n
        for i in range(n):
            for x in range(n):
                q = L[i, x]
                assert L.col_of[i, q] == x
                assert L.row_of[x, q] == i

    def test_partial_row_of(self):
        R = sq([[1, 2, 3]])
        assert R.row_of[0, 0] == 0 and R.row_of[0, 1] == -1

    def test_immutable(self):
        L = cyclic_square(3)
        with pytest.raises(ValueError):
            L.cells[0, 0] = 1

    def test_k_greater_than_n(self):
        with pytest.raises(ShapeError):
            LatinRectangle(np.zeros((3, 2), dtype=int))


class TestSigma:
    def test_worked_rows(self):
        cs = sigma_row_pair(sq([[1, 5, 3, 4, 2], [4, 3, 5, 2, 1]]), 0, 1)
        assert cs.cycles == ((0, 3, 4), (1, 2))
        assert cs.counts_by_length == {2: 1, 3: 1}

    def test_two_by_two(self):
        assert sigma_row_pair(sq(TWO), 0, 1).cycles == ((0, 1),)

    def test_cyclic_three(self):
        assert sigma_row_pair(cyclic_square(3), 0, 1).counts_by_length == {3: 1}

    @pytest.mark.parametrize("i,j", [(0, 0), (0, 5), (-1, 0)])
    def test_bad_rows(self, i, j):
        with pytest.raises(IndexError):
            sigma_row_pair(cyclic_square(3), i, j)

    @given(squares())
    def test_derangement_and_inverse(self, L):
        n = L.n
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                a = sigma_row_pair(L, i, j)
                assert a.fixed_points() == []
                assert sum(k * v for k, v in a.counts_by_length.items()) == n
                assert a.inverse() == sigma_row_pair(L, j, i)
                x = (i * 7 + j) % n
                y = a.perm[x]
                assert L[i, y] == L[j, x]

    def test_cycles_partition(self):
        cs = cycle_structure([2, 0, 1, 4, 3])
        assert sorted(c for cyc in cs.cycles for c in cyc) == list(range(5))
        assert cs.cycle_of[4] == cs.cycle_of[3]


class TestTau:
    def test_two_by_two(self):
        assert tau_column_pair(sq(TWO), 0, 1).cycles == ((0, 1),)

    def test_worked_pair_splits_rows(self, flip_example):
        cs = tau_column_pair(flip_example, 0, 2)
        assert not cs.same_cycle(0, 1)

    def test_cyclic_four(self):
        assert tau_column_pair(cyclic_square(4), 0, 2).cycles == ((0, 2), (1, 3))

    @given(squares())
    def test_no_fixed_points(self, L):
        for x in range(L.n):
            y = (x + 1) % L.n
            if x != y:
                t = tau_column_pair(L, x, y)
                assert t.fixed_points() == []
                i = 0
                assert L[t.perm[i], x] == L[i, y]


class TestIncidence:
    def test_full_cube(self):
        L = cyclic_square(5)
        assert incidence_count(L, Box.full(5)) == 25

    def test_one_row_one_symbol(self):
        L = cyclic_square(5)
        assert incidence_count(L, Box([0], range(5), [3])) == 1

    def test_two_by_two_column(self):
        assert incidence_count(sq(TWO), Box([0, 1], [0], [0, 1])) == 2

    def test_view_lines(self):
        V = IncidenceView(cyclic_square(4))
        assert V.shape == (4, 4, 4)
        assert V.line_sums_ok()
        assert sum(V[0, 0, q] for q in range(4)) == 1

    @given(squares(), st.data())
    def test_additive_in_symbols(self, L, data):
        n = L.n
        I = data.draw(st.sets(st.integers(0, n - 1)))
        X = data.draw(st.sets(st.integers(0, n - 1)))
        Q = data.draw(st.sets(st.integers(0, n - 1)))
        Q1 = {q for q in Q if q % 2}
        whole = incidence_count(L, Box(I, X, Q))
        assert whole == incidence_count(L, Box(I, X, Q1)) + incidence_count(L, Box(I, X, Q - Q1))
        assert 0 <= whole <= min(len(I) * len(X), len(I) * len(Q), len(X) * len(Q))
        assert incidence_count(L, Box(I, X, range(n))) == len(I) * len(X)

    def test_box_out_of_range(self):
        with pytest.raises(ValueError):
            incidence_count(cyclic_square(3), Box([3], [0], [0]))
