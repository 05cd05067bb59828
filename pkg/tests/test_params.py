import math

import pytest

from ldpmin.params import (
    ParamChoice,
    choose_params,
    gamma_threshold,
    params_known_alpha,
    params_unknown_alpha,
)

mpmath = pytest.importorskip("mpmath")


def reference_gamma(epsilon, depth, h, n):
    """Arbitrary-precision evaluation of the defining threshold formula."""
    with mpmath.workdps(50):
        m = mpmath.mpf(epsilon) / depth
        num = 4 * mpmath.exp(m) * (1 + mpmath.exp(m)) * mpmath.mpf(h)
        den = (mpmath.exp(m) - 1) ** 2 * n
        return float(mpmath.sqrt(num / den))


class TestGammaThreshold:
    def test_frozen_value(self):
        # high-precision evaluation, 50 digits, rounded to double
        assert gamma_threshold(1.0, 1, 1.0, 100) == pytest.approx(
            0.3700445322003778, rel=1e-14
        )

    def test_matches_reference_to_twelve_digits(self):
        for epsilon in (0.125, 0.5, 1.0, 4.0, 32.0):
            for depth in (1, 3, 10, 21):
                for h in (0.3, 3.45, 12.0):
                    for n in (64, 4096, 2**20):
                        ours = gamma_threshold(epsilon, depth, h, n)
                        ref = reference_gamma(epsilon, depth, h, n)
                        assert ours == pytest.approx(ref, rel=1e-12)

    def test_vanishes_with_h(self):
        assert gamma_threshold(1.0, 1, 1e-30, 100) < 1e-14

    def test_quarter_n_doubles_gamma(self):
        g1 = gamma_threshold(2.0, 4, 3.0, 1000)
        g4 = gamma_threshold(2.0, 4, 3.0, 4000)
        assert g1 / g4 == pytest.approx(2.0, rel=1e-12)

    def test_finite_at_infinite_epsilon(self):
        g = gamma_threshold(math.inf, 5, 2.0, 100)
        assert g == pytest.approx(2.0 * math.sqrt(2.0 / 100), rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            gamma_threshold(0.0, 1, 1.0, 10)
        with pytest.raises(ValueError):
            gamma_threshold(1.0, 1, -1.0, 10)


class TestKnownAlphaSchedule:
    def test_depth_and_h_at_two_to_twenty(self):
        p = params_known_alpha(2**20, 1.0, 4.0)
        assert p.depth == 10
        assert p.h == pytest.approx(math.log(2**20) / 2, rel=1e-15)
        assert p.mode == "lower_alpha"

    def test_depth_floor(self):
        assert params_known_alpha(2, 1.0, 1.0).depth == 1

    def test_half_alpha_doubles_depth(self):
        assert params_known_alpha(2**10, 0.5, 1.0).depth == 10

    def test_gamma_is_cached_consistently(self):
        p = params_known_alpha(5000, 1.0, 2.0)
        assert p.gamma == gamma_threshold(2.0, p.depth, p.h, 5000)

    def test_discretization_below_target_rate(self):
        # 2^-L <= N^(-1/(2 alpha0)) so the grid never dominates the rate
        for n in (4, 100, 1024, 10**6):
            for alpha0 in (0.5, 1.0, 2.0, 3.5):
                p = params_known_alpha(n, alpha0, 1.0)
                assert 2.0**-p.depth <= n ** (-1.0 / (2 * alpha0)) * (1 + 1e-12)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            params_known_alpha(1, 1.0, 1.0)


class TestUnknownAlphaSchedule:
    def test_presets_coincide_at_base(self):
        lower = params_known_alpha(1000, 1.0, 2.0)
        unknown = params_unknown_alpha(1000, 2.0)
        assert unknown.depth == lower.depth == 5
        assert unknown.h == lower.h
        assert unknown.gamma == lower.gamma

    def test_depth_at_two_to_twenty(self):
        assert params_unknown_alpha(2**20, 1.0).depth == 21

    def test_monotone_in_n(self):
        grid = [2**k for k in range(2, 21)]
        depths = [params_unknown_alpha(n, 1.0).depth for n in grid]
        hs = [params_unknown_alpha(n, 1.0).h for n in grid]
        assert depths == sorted(depths)
        assert hs == sorted(hs)

    def test_custom_base(self):
        p = params_unknown_alpha(10**6, 1.0, base=100.0)
        assert p.mode == "unknown_alpha:100"
        assert p.h == pytest.approx(math.log(10**6) ** 2 / (2 * math.log(100)), rel=1e-12)


class TestModeTokens:
    def test_round_trips(self):
        assert choose_params("lower_alpha", 500, 1.0) == params_known_alpha(500, 1.0, 1.0)
        assert choose_params("known_alpha:2", 500, 1.0) == params_known_alpha(500, 2.0, 1.0)
        assert choose_params("unknown_alpha", 500, 1.0) == params_unknown_alpha(500, 1.0)
        assert choose_params("unknown_alpha:50", 500, 1.0) == params_unknown_alpha(
            500, 1.0, base=50.0
        )

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            choose_params("nope", 100, 1.0)
        with pytest.raises(ValueError):
            choose_params("known_alpha:x", 100, 1.0)

    def test_param_choice_validation(self):
        with pytest.raises(ValueError):
            ParamChoice("lower_alpha", 0, 1.0, 0.1)
        with pytest.raises(ValueError):
            ParamChoice("lower_alpha", 1, 0.0, 0.1)
