from fractions import Fraction
from math import sqrt

import numpy as np
import pytest
from scipy.stats import chisquare

from latinlab import LatinSquare, ResourceError, cyclic_square, sample, sample_exact_small
from latinlab import _chain
from latinlab.oracle import enumerate_squares
from latinlab.rng import RNG_ID, RawStream, derive_seed
from latinlab.sampler import (
    ChainState,
    SampleConfig,
    autocorrelation,
    chain_step,
    raw_samples,
    sample_list,
)


class TestRawStream:
    def test_words_are_pcg64_raw(self):
        ref = np.random.PCG64(12345).random_raw(5)
        assert (RawStream(12345).words(5) == ref).all()

    def test_bounded_draw_matches_lemire_by_hand(self):
        words = np.random.PCG64(99).random_raw(200)
        got = RawStream(99)
        pos = 0
        for m in (1, 2, 3, 10, 1000, 2**31 - 1) * 10:
            thr = (2**32 - m) % m
            while True:
                p = (int(words[pos]) >> 32) * m
                pos += 1
                if p & 0xFFFFFFFF >= thr:
                    break
            assert got.below(m) == p >> 32

    def test_frozen_prefix(self):
        r = RawStream(12345)
        assert [r.below(10) for _ in range(8)] == [2, 3, 7, 6, 3, 3, 5, 1]
        assert r.below(1000003) == 672758
        assert RNG_ID == "pcg64-raw/lemire32/v1"

    def test_compiled_draw_agrees(self):
        buf = np.random.PCG64(5).random_raw(4000)
        ref = RawStream(5)
        pos = 0
        for m in [2, 3, 7, 19, 100] * 100:
            v, pos = _chain._below(buf, pos, m)
            assert v == ref.below(m)

    def test_push_back(self):
        c = RawStream(3)
        first = c.words(10)
        c.push_back(first[6:])
        assert (np.concatenate([first[:6], c.words(6)]) == RawStream(3).words(12)).all()

    def test_bounds(self):
        r = RawStream(0)
        with pytest.raises(ValueError):
            r.below(0)
        with pytest.raises(ValueError):
            r.below(2**31)

    def test_derive_seed(self):
        assert derive_seed(7, 1, 2) == 16652526507510397265
        assert derive_seed(7, 1) != derive_seed(7, 2) != derive_seed(8, 1)
        assert derive_seed(5) == 5

    def test_sample_and_permutation(self):
        r = RawStream(4)
        s = r.sample(20, 7)
        assert len(set(s)) == 7 and s == sorted(s) and max(s) < 20
        assert sorted(r.permutation(9)) == list(range(9))
        assert r.coins(130).shape == (130,)

    def test_below_is_uniform(self):
        r = RawStream(17)
        counts = np.bincount([r.below(6) for _ in range(60000)], minlength=6)
        assert chisquare(counts).pvalue > 1e-3


class TestChain:
    def test_order_one_is_fixed(self):
        st = ChainState(cyclic_square(1), seed=1)
        for _ in range(5):
            chain_step(st)
        assert st.proper and st.square().rows() == [[1]]
        assert st.step_count == 5

    def test_order_two_visits_both(self):
        seen = {L.key() for L in sample(SampleConfig(2, seed=3, burn_in=0, thinning=1, sample_count=40))}
        assert len(seen) == 2

    def test_debug_checks_every_step(self):
        st = ChainState(cyclic_square(6), seed=2, debug=True)
        st.advance(20000)
        assert st.check()

    def test_improper_states_hidden(self):
        st = ChainState(cyclic_square(5), seed=0)
        while st.proper:
            st.advance(1)
        assert st.improper_cell() is not None
        with pytest.raises(ValueError):
            st.square()
        A = st.cube.astype(int)
        assert (A.sum(axis=0) == 1).all() and (A.sum(axis=1) == 1).all() and (A.sum(axis=2) == 1).all()
        assert (A == -1).sum() == 1

    def test_step_by_step_equals_batched(self):
        a, b = ChainState(cyclic_square(5), 9), ChainState(cyclic_square(5), 9)
        for _ in range(300):
            a.advance(1)
        b.advance(300)
        assert (a.cube == b.cube).all() and (a.st == b.st).all()


class TestSample:
    def test_deterministic(self):
        cfg = SampleConfig(7, seed=42, sample_count=20)
        assert [L.key() for L in sample(cfg)] == [L.key() for L in sample(cfg)]

    def test_seeds_differ(self):
        a = sample_list(SampleConfig(7, seed=1, sample_count=3))
        b = sample_list(SampleConfig(7, seed=2, sample_count=3))
        assert a != b

    def test_workers_order_and_determinism(self):
        cfg = SampleConfig(6, seed=10, sample_count=7, workers=2)
        out = sample_list(cfg)
        assert len(out) == 7
        assert out == sample_list(cfg)
        w0 = sample_list(SampleConfig(6, seed=10, sample_count=4))
        w1 = sample_list(SampleConfig(6, seed=11, sample_count=3))
        assert out == w0 + w1

    def test_order_two_support(self):
        valid = {LatinSquare([[0, 1], [1, 0]]).key(), LatinSquare([[1, 0], [0, 1]]).key()}
        assert {L.key() for L in sample(SampleConfig(2, seed=0, sample_count=30))} <= valid

    def test_every_square_validates(self):
        for cells in raw_samples(SampleConfig(9, seed=5, thinning=81, sample_count=300)):
            LatinSquare(cells)

    def test_config_defaults_and_errors(self):
        c = SampleConfig(5)
        assert (c.burn, c.thin) == (125, 125)
        with pytest.raises(ValueError):
            SampleConfig(5, burn_in=-1)
        with pytest.raises(ValueError):
            SampleConfig(0)

    def test_mean_intercalates_order_five(self):
        exact = enumerate_squares(5).mean_intercalates()
        vals = np.array([_chain.intercalates_of(c) for c in
                         raw_samples(SampleConfig(5, seed=8, thinning=25, sample_count=100000))], dtype=float)
        se = vals.std(ddof=1) / sqrt(len(vals))
        assert abs(vals.mean() - float(exact)) < 3 * se


class TestExactSmall:
    def test_order_one(self):
        assert all(L.rows() == [[1]] for L in sample_exact_small(1, 5, seed=0))

    def test_order_three_frequencies(self):
        keys = [L.key() for L in sample_exact_small(3, 24000, seed=1)]
        uniq, counts = np.unique(keys, return_counts=True)
        assert len(uniq) == 12
        p = 1 / 12
        se = sqrt(p * (1 - p) / len(keys))
        assert np.all(np.abs(counts / len(keys) - p) < 3.5 * se)

    def test_order_four_chi_square(self):
        keys = [L.key() for L in sample_exact_small(4, 57600, seed=2)]
        _, counts = np.unique(keys, return_counts=True)
        assert len(counts) == 576
        assert chisquare(counts).pvalue > 1e-3

    def test_limit(self):
        with pytest.raises(ResourceError):
            next(sample_exact_small(6, 1, seed=0))


def test_autocorrelation():
    ac = autocorrelation([1, 2, 1, 2, 1, 2, 1, 2], 2)
    assert ac[0] == pytest.approx(1.0)
    assert ac[1] < 0 < ac[2]
    assert autocorrelation([3, 3, 3], 1) == [1.0, 0.0]


def test_exact_mean_is_fraction():
    assert isinstance(enumerate_squares(4).mean_intercalates(), Fraction)
