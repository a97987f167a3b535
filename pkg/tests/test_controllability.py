"""Growth-bound sequences: construction, validation, persistence."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpccert import (
    CSequence,
    ExpBound,
    GammaSequence,
    check_submultiplicative,
    constant_gamma,
    gamma_from_c_sequence,
    gamma_from_csv,
    gamma_from_exponential,
    gamma_to_csv,
)


class TestGammaSequence:
    def test_basic_access_is_one_based(self):
        g = GammaSequence((1.5, 2.0, 2.25))
        assert g.n == 3
        assert len(g) == 3
        assert g.gamma(1) == 1.5
        assert g.gamma(3) == 2.25

    def test_index_zero_is_the_implied_one(self):
        g = GammaSequence((1.5, 2.0))
        assert g.gamma(0) == 1.0

    def test_out_of_range_access_raises(self):
        g = GammaSequence((1.5, 2.0))
        with pytest.raises(IndexError):
            g.gamma(3)
        with pytest.raises(IndexError):
            g.gamma(-1)

    def test_needs_at_least_two_entries(self):
        with pytest.raises(ValueError):
            GammaSequence((1.5,))
        with pytest.raises(ValueError):
            GammaSequence(())

    def test_rejects_entries_below_one(self):
        with pytest.raises(ValueError):
            GammaSequence((0.5, 2.0))

    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            GammaSequence((2.0, 1.5))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GammaSequence((1.5, math.inf))
        with pytest.raises(ValueError):
            GammaSequence((math.nan, 2.0))

    def test_deltas_use_the_implied_leading_one(self):
        g = GammaSequence((1.5, 2.0, 2.25))
        assert g.deltas() == (0.5, 0.5, 0.25)

    def test_truncated(self):
        g = GammaSequence((1.5, 2.0, 2.25, 2.5))
        t = g.truncated(2)
        assert t.values == (1.5, 2.0)
        with pytest.raises(ValueError):
            g.truncated(5)

    def test_flat_sequence_is_valid(self):
        g = GammaSequence((1.0, 1.0, 1.0))
        assert g.deltas() == (0.0, 0.0, 0.0)


class TestConstructors:
    def test_exponential_matches_geometric_partial_sums(self):
        C, sigma, n = 3.0, 2.0 / 3.0, 6
        g = gamma_from_exponential(C, sigma, n)
        for i in range(1, n + 1):
            expect = C * sum(sigma ** k for k in range(i))
            assert g.gamma(i) == pytest.approx(expect, rel=1e-13)

    def test_exponential_first_entry_is_c(self):
        g = gamma_from_exponential(2.5, 0.4, 3)
        assert g.gamma(1) == pytest.approx(2.5, rel=1e-15)

    def test_exponential_validates_parameters(self):
        with pytest.raises(ValueError):
            gamma_from_exponential(0.5, 0.5, 4)  # C < 1
        with pytest.raises(ValueError):
            gamma_from_exponential(2.0, 1.0, 4)  # sigma not in (0,1)
        with pytest.raises(ValueError):
            gamma_from_exponential(2.0, 0.5, 1)  # too short

    def test_exp_bound_factory(self):
        b = ExpBound(2.0, 0.5)
        assert b.gamma(4).values == gamma_from_exponential(2.0, 0.5, 4).values
        with pytest.raises(ValueError):
            ExpBound(2.0, -0.1)

    def test_constant(self):
        g = constant_gamma(3.0, 4)
        assert g.values == (3.0, 3.0, 3.0, 3.0)
        with pytest.raises(ValueError):
            constant_gamma(0.9, 4)

    def test_c_sequence_partial_sums(self):
        g = gamma_from_c_sequence((1.0, 0.5, 0.25))
        assert g.values == (1.0, 1.5, 1.75)

    def test_c_sequence_validation(self):
        with pytest.raises(ValueError):
            CSequence((0.5, 1.0))  # c_0 < 1
        with pytest.raises(ValueError):
            CSequence((1.0, -0.1))  # negative coefficient
        with pytest.raises(ValueError):
            CSequence((1.0,))  # too short


class TestSubmultiplicative:
    def test_constant_sequence_is_submultiplicative(self):
        # Delta = (M-1, 0, 0, ...): all products of later differences are 0
        assert check_submultiplicative(constant_gamma(3.0, 6))

    def test_exponential_true_iff_squared_overshoot_dominates(self):
        # for the geometric-sum bounds the exact characterization is
        # (C - 1)^2 >= C * sigma; probe both sides of it
        for C, sigma, n in [(3.0, 2.0 / 3.0, 12), (2.0, 0.4, 9), (5.0, 0.9, 15)]:
            assert (C - 1.0) ** 2 >= C * sigma
            assert check_submultiplicative(gamma_from_exponential(C, sigma, n))
        for C, sigma, n in [(1.2, 0.5, 8), (1.5, 0.6, 10), (1.05, 0.2, 6)]:
            assert (C - 1.0) ** 2 < C * sigma
            assert not check_submultiplicative(gamma_from_exponential(C, sigma, n))

    def test_flat_then_growing_violates(self):
        # Delta_1 = 0 but Delta_2 > 0, so Delta_1 * Delta_1 < Delta_2
        assert not check_submultiplicative(GammaSequence((1.0, 1.05, 1.1)))


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        g = gamma_from_exponential(3.0, 2.0 / 3.0, 8)
        path = tmp_path / "gamma.csv"
        gamma_to_csv(g, path)
        back = gamma_from_csv(path)
        assert back.n == g.n
        for a, b in zip(back.values, g.values):
            assert a == pytest.approx(b, rel=1e-11)  # 12-digit text format

    def test_file_format(self, tmp_path):
        path = tmp_path / "gamma.csv"
        gamma_to_csv(GammaSequence((1.5, 2.0)), path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "i,gamma"
        assert lines[1] == "1,1.5"
        assert lines[2] == "2,2"

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("gamma,i\n1,1.5\n")
        with pytest.raises(ValueError, match="header"):
            gamma_from_csv(path)

    def test_rejects_gap_in_indices(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,gamma\n1,1.5\n3,2.0\n")
        with pytest.raises(ValueError, match="index"):
            gamma_from_csv(path)

    def test_rejects_malformed_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,gamma\n1,1.5,extra\n")
        with pytest.raises(ValueError):
            gamma_from_csv(path)


@st.composite
def gamma_sequences(draw, max_n=12):
    n = draw(st.integers(min_value=2, max_value=max_n))
    g1 = draw(st.floats(min_value=1.0, max_value=50.0, allow_nan=False))
    incs = draw(
        st.lists(
            st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
            min_size=n - 1,
            max_size=n - 1,
        )
    )
    vals = [g1]
    for d in incs:
        vals.append(vals[-1] + d)
    return GammaSequence(tuple(vals))


@settings(max_examples=80, deadline=None)
@given(gamma_sequences())
def test_any_valid_sequence_round_trips_through_csv(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("csv") / "g.csv"
    gamma_to_csv(g, path)
    back = gamma_from_csv(path)
    assert back.n == g.n
    np.testing.assert_allclose(back.values, g.values, rtol=1e-11)


@settings(max_examples=80, deadline=None)
@given(gamma_sequences())
def test_deltas_always_sum_back_to_gamma(g):
    partial = 1.0
    for d, v in zip(g.deltas(), g.values):
        partial += d
        assert partial == pytest.approx(v, rel=1e-12, abs=1e-12)
