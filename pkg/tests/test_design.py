"""Velocity-weight design: slope, optimum, bounds, harm threshold, and the
amplitude-minimizing weight."""

import math
from dataclasses import replace

import numpy as np
import pytest

from delayq import (SystemParams, UnsupportedRegimeError,
                    amplitude_minimizing_weight, critical_delay,
                    critical_delay_slope, design_summary, harm_threshold,
                    max_critical_delay_bounds, optimal_weight,
                    optimal_weight_bounds)

FIG = SystemParams(10.0, 1.0, 1.0, 2, 0.0, 0.0)


def dcr_at(params, w):
    return critical_delay(replace(params, velocity_weight=w), 0)


class TestSlope:
    def test_equals_one_at_zero_weight(self):
        assert critical_delay_slope(FIG, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_negative_near_weight_limit(self):
        assert critical_delay_slope(FIG, 0.19) < 0

    def test_matches_finite_differences(self):
        h = 1e-6
        for w in (0.02, 0.05, 0.11, 0.17):
            fd = (dcr_at(FIG, w + h) - dcr_at(FIG, w - h)) / (2 * h)
            assert critical_delay_slope(FIG, w) == pytest.approx(fd, rel=1e-6)

    def test_strictly_decreasing(self):
        grid = np.linspace(0.0, 0.995 * FIG.weight_limit, 100)
        slopes = [critical_delay_slope(FIG, w) for w in grid]
        assert all(a > b for a, b in zip(slopes, slopes[1:]))

    def test_regime_guards(self):
        with pytest.raises(UnsupportedRegimeError):
            critical_delay_slope(SystemParams(1, 1, 1, 2, 0, 0), 0.0)
        with pytest.raises(UnsupportedRegimeError):
            critical_delay_slope(FIG, 0.25)


class TestOptimalWeight:
    def test_bounds_figure_values(self):
        lower, upper = optimal_weight_bounds(FIG)
        assert lower == pytest.approx(0.0609, abs=1e-4)
        assert upper == pytest.approx(0.0840, abs=1e-4)
        assert 0 < lower < upper < FIG.weight_limit

    def test_optimum_inside_bounds(self):
        lower, upper = optimal_weight_bounds(FIG)
        w = optimal_weight(FIG)
        assert lower < w < upper

    def test_fixed_point_equation(self):
        # the stationarity condition in its fixed-point form
        w = optimal_weight(FIG)
        lam_th, n, mu = 10.0, 2, 1.0
        d0 = dcr_at(FIG, w)
        lhs = math.sqrt(n ** 2 - (w * lam_th) ** 2) / (1 + w * mu)
        rhs = (w * lam_th ** 2 / math.sqrt(lam_th ** 2 - (n * mu) ** 2)
               * math.acos(-(w * lam_th ** 2 + n ** 2 * mu)
                           / (n * lam_th * (1 + w * mu))))
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_interior_maximum(self):
        w = optimal_weight(FIG)
        peak = dcr_at(FIG, w)
        assert dcr_at(FIG, w - 1e-4) < peak
        assert dcr_at(FIG, w + 1e-4) < peak

    def test_ordering_on_grid(self):
        for lam in (5.0, 8.0, 12.0, 16.0, 20.0):
            for mu in (0.5, 0.9, 1.4, 1.9, 2.4):
                p = SystemParams(lam, mu, 1.0, 2, 0.0, 0.0)
                if lam <= 2 * mu:
                    continue
                lower, upper = optimal_weight_bounds(p)
                w = optimal_weight(p)
                assert 0 < lower < w < upper < p.weight_limit


class TestMaxDelayBounds:
    def test_bracket_optimum(self):
        lo, hi = max_critical_delay_bounds(FIG)
        best = dcr_at(FIG, optimal_weight(FIG))
        assert lo < best < hi

    def test_tightness_sanity(self):
        lo, hi = max_critical_delay_bounds(FIG)
        best = dcr_at(FIG, optimal_weight(FIG))
        assert hi - lo < best

    def test_curve_never_exceeds_upper_bound(self):
        lo, hi = max_critical_delay_bounds(FIG)
        grid = np.linspace(0.0, 0.999 * FIG.weight_limit, 100)
        values = [dcr_at(FIG, w) for w in grid]
        assert max(values) <= hi
        assert max(values) >= lo


class TestHarmThreshold:
    def test_defining_equation(self):
        cap = harm_threshold(FIG)
        assert dcr_at(FIG, cap) == pytest.approx(dcr_at(FIG, 0.0), abs=1e-9)

    def test_above_optimum_below_limit(self):
        cap = harm_threshold(FIG)
        assert optimal_weight(FIG) < cap < FIG.weight_limit

    def test_sign_change(self):
        cap = harm_threshold(FIG)
        d0 = dcr_at(FIG, 0.0)
        assert dcr_at(FIG, cap - 1e-6) - d0 > 0
        assert dcr_at(FIG, cap + 1e-6) - d0 < 0

    def test_near_limit_is_harmful(self):
        w = 0.99 * FIG.weight_limit
        assert dcr_at(FIG, w) < dcr_at(FIG, 0.0)


class TestDesignSummary:
    def test_full_chain(self):
        s = design_summary(FIG)
        assert (0 < s.weight_lower < s.optimal_weight < s.weight_upper
                < s.harm_threshold < FIG.weight_limit)
        assert s.delay_lower < s.critical_delay_at_optimal < s.delay_upper
        assert s.critical_delay_at_zero < s.critical_delay_at_optimal

    def test_regime_guard(self):
        with pytest.raises(UnsupportedRegimeError):
            design_summary(SystemParams(1, 1, 1, 2, 0, 0))


class TestAmplitudeMinimizingWeight:
    def test_stabilizing_when_delay_is_reachable(self):
        w_opt = optimal_weight(FIG)
        best = dcr_at(FIG, w_opt)
        choice = amplitude_minimizing_weight(FIG, best)
        assert choice.stabilizing
        assert choice.weight == pytest.approx(w_opt, abs=1e-9)
        assert choice.amplitude == 0.0

    def test_second_order_minimizer_is_interior(self):
        choice = amplitude_minimizing_weight(FIG, 0.5, order=2)
        assert 0.08 < choice.weight < 0.14
        assert not choice.stabilizing

    def test_first_order_minimizer_near_limit(self):
        choice = amplitude_minimizing_weight(FIG, 0.5, order=1)
        assert choice.weight > 0.17

    def test_chosen_weight_is_a_local_minimum(self):
        from delayq import second_order_amplitude
        choice = amplitude_minimizing_weight(FIG, 0.5, order=2)

        def amp(w):
            p = replace(FIG, velocity_weight=w, delay=0.5)
            return second_order_amplitude(p, 0.5).second_order

        assert choice.amplitude < amp(0.0)
        assert choice.amplitude < amp(choice.weight - 0.01)
        assert choice.amplitude < amp(choice.weight + 0.01)

    def test_regime_guards(self):
        with pytest.raises(UnsupportedRegimeError):
            amplitude_minimizing_weight(SystemParams(10, 1, 1, 3, 0, 0), 0.5)
        with pytest.raises(UnsupportedRegimeError):
            amplitude_minimizing_weight(FIG, 0.5, order=3)
