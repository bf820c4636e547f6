"""Bessel evaluation and zero finding against independent references."""

import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from demasq import bessel
from demasq.errors import DomainError

DATA = os.path.join(os.path.dirname(__file__), "data")

# Reference values, mpmath at 40 digits.
J1_AT_1 = 0.4400505857449335
FIRST_ZEROS = (2.404825557695773, 5.520078110286311, 8.653727912911013)


@pytest.fixture(scope="module")
def zero_oracle():
    with open(os.path.join(DATA, "j0_zeros_768.json")) as fh:
        payload = json.load(fh)
    assert payload["max_order"] == 768
    return np.array(payload["zeros"])


class TestEvaluation:
    def test_j0_at_zero(self):
        assert bessel.eval_j0(0.0) == 1.0

    def test_j1_at_zero(self):
        assert bessel.eval_j1(0.0) == 0.0

    def test_j1_reference_point(self):
        assert abs(bessel.eval_j1(1.0) - J1_AT_1) < 1e-15

    def test_j0_vanishes_at_first_zeros(self):
        for z in FIRST_ZEROS:
            assert abs(bessel.eval_j0(z)) < 1e-14

    def test_dense_grid_against_scipy(self):
        # scipy.special is an independent implementation; agreement on a
        # dense grid covers both the series and asymptotic branches
        xs = np.linspace(0.0, 40.0, 2001)
        mine0 = np.array([bessel.eval_j0(float(x)) for x in xs])
        mine1 = np.array([bessel.eval_j1(float(x)) for x in xs])
        assert np.abs(mine0 - special.j0(xs)).max() < 5e-15
        assert np.abs(mine1 - special.j1(xs)).max() < 5e-15

    def test_large_arguments_against_scipy(self, rng):
        xs = rng.uniform(40.0, 2500.0, 200)
        for x in xs:
            assert abs(bessel.eval_j0(float(x)) - special.j0(x)) < 5e-15
            assert abs(bessel.eval_j1(float(x)) - special.j1(x)) < 5e-15

    def test_branch_seam_is_continuous(self):
        below = bessel.eval_j0(math.nextafter(bessel._SERIES_CUTOFF, 0.0))
        above = bessel.eval_j0(math.nextafter(bessel._SERIES_CUTOFF, 100.0))
        assert abs(below - above) < 1e-13

    def test_j0_even_j1_odd(self):
        for x in (0.3, 2.7, 18.9):
            assert bessel.eval_j0(-x) == bessel.eval_j0(x)
            assert bessel.eval_j1(-x) == -bessel.eval_j1(x)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"),
                                     float("-inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            bessel.eval_j0(bad)
        with pytest.raises(DomainError):
            bessel.eval_j1(bad)

    @given(st.floats(min_value=-30.0, max_value=30.0,
                     allow_nan=False, allow_infinity=False))
    @settings(max_examples=200, deadline=None)
    def test_amplitude_bound(self, x):
        assert abs(bessel.eval_j0(x)) <= 1.0 + 1e-15
        assert abs(bessel.eval_j1(x)) <= 1.0 + 1e-15


class TestZeros:
    def test_first_three(self):
        for n, ref in enumerate(FIRST_ZEROS, start=1):
            assert abs(bessel.zero_of_j0(n) - ref) < 1e-13

    def test_against_bisection_oracle(self, zero_oracle):
        # both sides are doubles rounded from the true zeros; at order 768
        # (x ~ 2412) one ulp is already ~4.5e-13
        mine = np.array([bessel.zero_of_j0(n) for n in range(1, 769)])
        assert np.abs(mine - zero_oracle).max() < 2e-12

    def test_monotone_increasing(self):
        zs = [bessel.zero_of_j0(n) for n in range(1, 60)]
        assert all(a < b for a, b in zip(zs, zs[1:]))

    def test_spacing_approaches_pi(self):
        # consecutive J0 zeros are asymptotically pi apart
        gap = bessel.zero_of_j0(1000) - bessel.zero_of_j0(999)
        assert abs(gap - math.pi) < 1e-4

    def test_largest_supported_order(self):
        z = bessel.zero_of_j0(10000)
        assert abs(bessel.eval_j0(z)) < 1e-11

    @pytest.mark.parametrize("bad", [0, -1, 10001])
    def test_order_out_of_range(self, bad):
        with pytest.raises(DomainError):
            bessel.zero_of_j0(bad)

    @pytest.mark.parametrize("bad", [1.5, "3", None, True])
    def test_order_must_be_integer(self, bad):
        with pytest.raises(DomainError):
            bessel.zero_of_j0(bad)


class TestTable:
    def test_zero_accessor_is_one_based(self):
        table = bessel.build_table(8)
        assert table.zero(1) == pytest.approx(FIRST_ZEROS[0], abs=1e-13)
        assert table.zero(8) == pytest.approx(bessel.zero_of_j0(8), abs=0)

    def test_ratio_of_fundamental_is_one(self):
        assert bessel.build_table(3).ratio(1) == 1.0

    def test_out_of_table_range(self):
        table = bessel.build_table(4)
        with pytest.raises(DomainError):
            table.zero(5)
        with pytest.raises(DomainError):
            table.ratio(0)

    def test_cache_grows_consistently(self):
        small = bessel.build_table(5)
        large = bessel.build_table(20)
        assert np.array_equal(large.zeros[:5], small.zeros)

    def test_zeros_are_read_only(self):
        table = bessel.build_table(4)
        with pytest.raises(ValueError):
            table.zeros[0] = 0.0
