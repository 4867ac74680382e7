import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import ive

from tumorbif.bessel_ratios import (
    N_MAX,
    _p0_series,
    p1_explicit,
    p2_explicit,
    p_ratio,
    p_ratios,
    profile_boundary_derivs,
    radial_profile,
    ratio_table,
)
from tumorbif.errors import DomainError, OrderRangeError

R_GRID = np.round(np.arange(0.1, 20.0001, 0.1), 10)


def scipy_ratio(n, r):
    # exponentially scaled Bessel functions cancel the e^r factor in the ratio
    return ive(n + 1.5, r) / (r * ive(n + 0.5, r))


def mp_profile(n, r, big_r):
    f = lambda x: mpmath.besseli(n + 0.5, x) / mpmath.sqrt(x)  # noqa: E731
    return f(r) / f(big_r)


class TestPRatio:
    def test_p0_at_one(self):
        with mpmath.workdps(30):
            oracle = float((mpmath.cosh(1) - mpmath.sinh(1)) / mpmath.sinh(1))
        assert p_ratio(0, 1.0) == pytest.approx(oracle, rel=1e-15)
        assert p_ratio(0, 1.0) == pytest.approx(0.3130353, abs=1e-7)

    def test_p1_at_one_from_identity(self):
        p0 = p_ratio(0, 1.0)
        assert p_ratio(1, 1.0) == pytest.approx((1 - 3 * p0) / p0, rel=1e-14)
        assert p_ratio(1, 1.0) == pytest.approx(0.194528, abs=1e-6)
        assert p_ratio(1, 1.0) == pytest.approx(p1_explicit(1.0), rel=1e-13)

    @pytest.mark.parametrize("n", range(0, 11))
    def test_small_r_limit(self, n):
        assert abs(p_ratio(n, 1e-3) - 1.0 / (2 * n + 3)) <= 1e-6

    @pytest.mark.parametrize("r", [1e-3, 0.01, 0.3, 0.5, 1.0, 2.5, 7.0, 20.0, 55.0, 150.0, 300.0])
    def test_against_scipy(self, r):
        ours = p_ratios(r, 20)
        ref = np.array([scipy_ratio(n, r) for n in range(21)])
        assert_allclose(ours, ref, rtol=5e-14)

    def test_against_mpmath_high_order(self):
        r = 0.2
        with mpmath.workdps(40):
            ref = [float(mpmath.besseli(n + 1.5, r) / (r * mpmath.besseli(n + 0.5, r)))
                   for n in range(N_MAX + 1)]
        assert_allclose(p_ratios(r, N_MAX), ref, rtol=1e-14)

    def test_explicit_formulas_agree(self):
        for r in np.linspace(0.5, 20, 80):
            assert_allclose(p1_explicit(r), p_ratio(1, r), rtol=1e-12)
            assert_allclose(p2_explicit(r), p_ratio(2, r), rtol=1e-12)

    def test_series_branch_overlap(self):
        for r in np.linspace(0.4, 0.6, 41):
            closed = (r / math.tanh(r) - 1.0) / (r * r)
            assert abs(_p0_series(r) - closed) <= 1e-13 * closed

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_bad_radius(self, bad):
        with pytest.raises(DomainError):
            p_ratio(0, bad)

    def test_order_range(self):
        with pytest.raises(OrderRangeError):
            p_ratio(N_MAX + 1, 1.0)
        with pytest.raises(OrderRangeError):
            p_ratio(5, 1.0, n_max=4)
        with pytest.raises(OrderRangeError):
            p_ratio(-1, 1.0)
        with pytest.raises(OrderRangeError):
            p_ratios(1.0, N_MAX + 1)

    @settings(max_examples=200, deadline=None)
    @given(r=st.floats(1e-3, 200.0), n=st.integers(0, N_MAX - 1))
    def test_identity_property(self, r, n):
        p = p_ratios(r, n + 1)
        assert abs(r * r * p[n] * p[n + 1] + (2 * n + 3) * p[n] - 1.0) <= 1e-12
        assert p[n] > p[n + 1] > 0


class TestRatioTable:
    @pytest.mark.parametrize("r", R_GRID[::7])
    def test_invariants(self, r):
        t = ratio_table(r, 11)
        assert t.is_valid()
        assert np.max(t.identity_residuals()) <= 1e-12

    def test_grid_positive_decreasing(self):
        for r in R_GRID:
            v = p_ratios(r, 11)
            assert np.all(v > 0)
            assert np.all(np.diff(v) < 0)


class TestRadialProfile:
    def test_normalization(self):
        for n in (0, 1, 4, 9):
            assert radial_profile(n, 3.3, 3.3) == 1.0

    def test_n0_closed(self):
        r, big_r = 0.7, 2.9
        assert radial_profile(0, r, big_r) == pytest.approx(
            (math.sinh(r) / r) * (big_r / math.sinh(big_r)), rel=1e-14)

    def test_ascending_series_i52(self):
        # I_{5/2}(x) = sum_k (x/2)^{2k+5/2} / (k! Gamma(k+7/2))
        def i52(x):
            return sum((x / 2) ** (2 * k + 2.5) / (math.factorial(k) * math.gamma(k + 3.5))
                       for k in range(30))

        oracle = (i52(0.5) / math.sqrt(0.5)) / (i52(1.0) / 1.0)
        assert radial_profile(2, 0.5, 1.0) == pytest.approx(oracle, abs=1e-10)

    def test_range_and_large_arguments(self):
        for n in (0, 3, 10):
            for r in (1e-3, 0.5, 5.0, 49.0):
                v = radial_profile(n, r, 50.0)
                assert 0 < v <= 1
        assert radial_profile(3, 1.0, 700.0) >= 0.0
        assert math.isfinite(radial_profile(3, 650.0, 700.0))

    def test_outside_ball_rejected(self):
        with pytest.raises(DomainError):
            radial_profile(1, 2.0, 1.0)

    @pytest.mark.parametrize("n", [0, 1, 2, 5])
    def test_matches_mpmath(self, n):
        for r in (0.05, 0.9, 3.0):
            with mpmath.workdps(30):
                ref = float(mp_profile(n, r, 3.5))
            assert radial_profile(n, r, 3.5) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 6])
    def test_radial_ode(self, n):
        big_r, h = 4.0, 1e-4
        for r in np.linspace(0.5, 3.5, 7):
            u = [radial_profile(n, r + k * h, big_r) for k in (-1, 0, 1)]
            d1 = (u[2] - u[0]) / (2 * h)
            d2 = (u[2] - 2 * u[1] + u[0]) / h**2
            res = d2 + 2 / r * d1 - (1 + n * (n + 1) / r**2) * u[1]
            assert abs(res) <= 1e-5


class TestBoundaryDerivs:
    def test_n0_first(self):
        big_r = 1.7
        assert profile_boundary_derivs(0, big_r)[0] == pytest.approx(big_r * p_ratio(0, big_r))

    def test_n2_second_at_one(self):
        assert profile_boundary_derivs(2, 1.0)[1] == pytest.approx(3 - 2 * p_ratio(2, 1.0))
        assert profile_boundary_derivs(2, 1.0)[1] == pytest.approx(3 - 0.281296, abs=1e-5)

    @pytest.mark.parametrize("n", [0, 1, 2, 3, 7])
    @pytest.mark.parametrize("big_r", [0.3, 1.0, 2.17, 8.0])
    def test_finite_differences(self, n, big_r):
        # central differences straddle R, so evaluate on a larger ball and rescale
        h = 1e-4
        outer = big_r + 1.0
        f = lambda r: radial_profile(n, r, outer) / radial_profile(n, big_r, outer)  # noqa: E731
        d1 = (f(big_r + h) - f(big_r - h)) / (2 * h)
        d2 = (f(big_r + h) - 2 * f(big_r) + f(big_r - h)) / h**2
        ours = profile_boundary_derivs(n, big_r)
        assert ours[0] == pytest.approx(d1, abs=1e-6 * max(1, abs(d1)))
        assert ours[1] == pytest.approx(d2, abs=1e-6 * max(1, abs(d2)))
        # third difference at h = 1e-4 needs more than 16 digits
        with mpmath.workdps(40):
            g = lambda r: mp_profile(n, r, big_r)  # noqa: E731
            hm = mpmath.mpf(h)
            d3 = (g(big_r + 2 * hm) - 2 * g(big_r + hm) + 2 * g(big_r - hm) - g(big_r - 2 * hm)) / (2 * hm**3)
        assert ours[2] == pytest.approx(float(d3), abs=1e-6 * max(1, abs(float(d3))))
