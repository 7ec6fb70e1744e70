import itertools
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latinlab import LatinSquare, ResourceError, census, make_rectangle
from latinlab.oracle import (
    CHECKPOINT_VERSION,
    count_one_factorizations,
    enumerate_rectangles,
    enumerate_regular_bipartite,
    enumerate_squares,
    exact_permanent,
    iter_squares,
    naive_permanent,
    perfect_matchings,
    regular_bipartite_graphs,
)

COUNTS = {1: 1, 2: 2, 3: 12, 4: 576, 5: 161280}


class TestSquares:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_counts(self, n):
        assert enumerate_squares(n).total_count == COUNTS[n]

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_reduced_times_factorial(self, n):
        full, red = enumerate_squares(n), enumerate_squares(n, reduced=True)
        assert red.total_count == full.total_count
        assert red.n_histogram == full.n_histogram
        assert red.class_sizes == full.class_sizes
        assert len(list(iter_squares(n, reduced=True))) == COUNTS[n] // factorial(n)

    def test_histograms(self):
        r4 = enumerate_squares(4)
        assert r4.n_histogram == {4: 432, 12: 144}
        assert min(r4.n_histogram) >= 1
        assert r4.class_sizes == {0: 288, 2: 288}
        r5 = enumerate_squares(5)
        assert r5.n_histogram == {0: 17280, 4: 144000}
        assert r5.class_sizes == {0: 103680, 1: 57600}
        assert r5.mean_intercalates() == Fraction(25, 7)
        assert r5.mean_two_row() == Fraction(5, 14)

    def test_histogram_matches_census(self, all_squares4):
        hist = {}
        for M in all_squares4:
            N = census(LatinSquare(M)).total
            hist[N] = hist.get(N, 0) + 1
        assert hist == enumerate_squares(4).n_histogram

    def test_collected_are_distinct_and_valid(self, all_squares4):
        assert len({M.tobytes() for M in all_squares4}) == 576
        for M in all_squares4[::17]:
            LatinSquare(M)

    def test_callback_sees_every_square(self):
        seen = []
        enumerate_squares(3, lambda rows, N, s: seen.append((tuple(rows), N, s)))
        assert len(set(seen)) == 12 and all(N == 0 for _, N, _ in seen)

    def test_workers_agree(self):
        a, b = enumerate_squares(5), enumerate_squares(5, workers=2)
        assert (a.total_count, a.n_histogram, a.class_sizes) == (b.total_count, b.n_histogram, b.class_sizes)

    def test_variance(self):
        assert enumerate_squares(3).variance_intercalates() == 0
        r = enumerate_squares(4)
        assert r.variance_intercalates() > 0

    def test_limits(self):
        with pytest.raises(ResourceError):
            enumerate_squares(6)
        with pytest.raises(ResourceError):
            enumerate_squares(7, long_run=True)
        with pytest.raises(ValueError):
            enumerate_squares(0)


class TestCheckpoint:
    def test_resume_gives_same_counts(self, tmp_path):
        path = str(tmp_path / "ck.json")
        a = enumerate_squares(5, checkpoint=path)
        b = enumerate_squares(5, checkpoint=path)
        assert (a.total_count, a.n_histogram) == (b.total_count, b.n_histogram)

    def test_partial_checkpoint_resumes(self, tmp_path):
        import json
        from latinlab.oracle import _enumerate

        path = str(tmp_path / "ck.json")
        full = enumerate_squares(5)
        with pytest.raises(ResourceError):
            _enumerate(5, 5, reduced=False, checkpoint=path, checkpoint_every=1, budget=20000)
        state = json.load(open(path))
        assert state["version"] == CHECKPOINT_VERSION and 0 < state["cursor"]
        res = _enumerate(5, 5, reduced=False, checkpoint=path)
        assert (res.total_count, res.n_histogram, res.class_sizes) == \
            (full.total_count, full.n_histogram, full.class_sizes)

    def test_mismatched_checkpoint(self, tmp_path):
        path = str(tmp_path / "ck.json")
        enumerate_squares(4, checkpoint=path)
        with pytest.raises(ValueError):
            enumerate_squares(5, checkpoint=path)


class TestRectangles:
    def test_single_row(self):
        r = enumerate_rectangles(1, 4)
        assert r.total_count == 24 and r.n_histogram == {0: 24}

    def test_two_by_three(self):
        assert enumerate_rectangles(2, 3).total_count == 12

    def test_two_by_four_histogram(self):
        r = enumerate_rectangles(2, 4)
        assert r.total_count == 24 * 9
        assert r.n_histogram == {0: 144, 2: 72}

    @pytest.mark.parametrize("k,n", [(2, 4), (3, 4), (2, 5), (3, 5)])
    def test_brute_force(self, k, n):
        perms = list(itertools.permutations(range(n)))
        count, hist = 0, {}
        for rows in itertools.product(perms, repeat=k):
            M = np.array(rows)
            if all(len(set(M[:, c])) == k for c in range(n)):
                count += 1
                N = census(make_rectangle(M)).total
                hist[N] = hist.get(N, 0) + 1
        r = enumerate_rectangles(k, n)
        assert r.total_count == count and r.n_histogram == dict(sorted(hist.items()))
        assert enumerate_rectangles(k, n, reduced=False).total_count == count

    def test_full_rectangle_is_square_count(self):
        assert enumerate_rectangles(4, 4).total_count == 576

    def test_budget(self, monkeypatch):
        monkeypatch.setenv("LATINLAB_BUDGET", "50")
        with pytest.raises(ResourceError):
            enumerate_rectangles(4, 5)

    def test_limits(self):
        with pytest.raises(ResourceError):
            enumerate_rectangles(2, 7)
        with pytest.raises(ValueError):
            enumerate_rectangles(0, 3)


class TestPermanent:
    def test_identity(self):
        assert exact_permanent(np.eye(4, dtype=int)).value == 1

    @pytest.mark.parametrize("n", range(1, 9))
    def test_all_ones(self, n):
        assert exact_permanent(np.ones((n, n), dtype=int)).value == factorial(n)

    def test_even_cycle(self):
        for n in range(2, 8):
            B = np.eye(n, dtype=int) + np.roll(np.eye(n, dtype=int), 1, axis=1)
            assert exact_permanent(B).value == 2

    def test_empty_and_errors(self):
        assert exact_permanent(np.zeros((0, 0))).value == 1
        with pytest.raises(ValueError):
            exact_permanent(np.ones((2, 3)))
        with pytest.raises(ResourceError):
            exact_permanent(np.ones((25, 25), dtype=int))

    def test_big_integer(self):
        assert exact_permanent(np.full((6, 6), 10**6)).value == factorial(6) * 10**36

    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_matches_naive(self, n, seed):
        M = np.random.default_rng(seed).integers(0, 4, size=(n, n))
        assert exact_permanent(M).value == naive_permanent(M)

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_matchings_count(self, n, seed):
        B = np.random.default_rng(seed).integers(0, 2, size=(n, n))
        assert len(perfect_matchings(B)) == exact_permanent(B).value


class TestRegularGraphs:
    def test_small_counts(self):
        assert [enumerate_regular_bipartite(3, d) for d in range(4)] == [1, 6, 6, 1]
        assert [enumerate_regular_bipartite(4, d) for d in range(5)] == [1, 24, 90, 24, 1]

    def test_complement_symmetry(self):
        for n in range(1, 5):
            for d in range(n + 1):
                assert enumerate_regular_bipartite(n, d) == enumerate_regular_bipartite(n, n - d)

    def test_graphs_are_regular(self):
        for B in regular_bipartite_graphs(4, 2):
            assert (B.sum(axis=0) == 2).all() and (B.sum(axis=1) == 2).all()

    def test_limit(self):
        with pytest.raises(ResourceError):
            enumerate_regular_bipartite(5, 2)
        with pytest.raises(ValueError):
            list(regular_bipartite_graphs(3, 4))

    def test_factorizations(self):
        assert count_one_factorizations(np.eye(3, dtype=int)) == 1
        assert count_one_factorizations(np.ones((3, 3), dtype=int)) == 12
        assert count_one_factorizations(np.ones((4, 4), dtype=int)) == 576
        C = np.eye(4, dtype=int) + np.roll(np.eye(4, dtype=int), 1, axis=1)
        assert count_one_factorizations(C) == 2
