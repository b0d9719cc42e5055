"""Calibrated stopping-time intervals."""

import math

import numpy as np
import pytest

from slopelab.stopping import stopping_intervals


def unit_indicator(t):
    return 1.0 if 0.0 <= t <= 1.0 else 0.0


class TestUnitIndicator:
    def test_two_intervals_with_exact_endpoints(self):
        # defining equation solved by hand: first |I|^2 = 1/2, then
        # (a3 - a2)(1 - a2) = 1/2
        dec = stopping_intervals(unit_indicator, (0.0, 1.0), -2.0, breakpoints=(0.0, 1.0))
        assert dec.k == 2
        expected = (0.0, math.sqrt(0.5), math.sqrt(0.5) + 0.5 / (1.0 - math.sqrt(0.5)))
        for a, b in zip(dec.endpoints, expected):
            assert a == pytest.approx(b, abs=1e-9)

    def test_residuals_meet_the_defining_equation(self):
        dec = stopping_intervals(unit_indicator, (0.0, 1.0), -2.0, breakpoints=(0.0, 1.0))
        worst = max(abs(r) for r in dec.residuals(unit_indicator, points=(0.0, 1.0)))
        assert worst < 1e-10

    def test_cover_reaches_past_the_support(self):
        dec = stopping_intervals(unit_indicator, (0.0, 1.0), -2.0, breakpoints=(0.0, 1.0))
        assert dec.endpoints[0] == 0.0
        assert dec.endpoints[-1] >= 1.0


class TestEdgeCases:
    def test_tiny_support_single_interval(self):
        eps = 1e-3
        f = lambda t: 1.0 if 0.0 <= t <= eps else 0.0
        dec = stopping_intervals(f, (0.0, eps), -2.0, breakpoints=(0.0, eps))
        assert dec.k == 1
        # |I| * eps = 1/2 forces |I| = 500, far beyond the support
        assert dec.endpoints[1] == pytest.approx(0.5 / eps, rel=1e-9)

    def test_smooth_density(self):
        f = lambda t: max(0.0, 1.0 - abs(t)) ** 2
        dec = stopping_intervals(f, (-1.0, 1.0), -1.5, breakpoints=(-1.0, 0.0, 1.0))
        assert dec.endpoints[-1] >= 1.0
        worst = max(abs(r) for r in dec.residuals(f, points=(-1.0, 0.0, 1.0)))
        assert worst < 1e-10

    def test_regime_validation(self):
        with pytest.raises(ValueError):
            stopping_intervals(unit_indicator, (0.0, 1.0), -0.5)

    def test_zero_mass_rejected(self):
        with pytest.raises(ValueError):
            stopping_intervals(lambda t: 0.0, (0.0, 1.0), -2.0)
