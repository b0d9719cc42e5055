"""The measure engine against closed forms, brute force, and its invariants."""

import math

import numpy as np
import pytest

from slopelab.catalog import make_standard, dilate, negate, reflect
from slopelab.constants import halfline_closed_form
from slopelab.measure import (
    BudgetExceededError,
    LevelSetQuery,
    nu_measure,
    nu_measure_truncated,
    quotient,
)
from slopelab.params import Params


def P(gamma, p=1.0, dim=1):
    return Params(dim=dim, p=p, gamma=gamma)


class TestQuotient:
    def test_step_jump_over_distance_two(self):
        step = make_standard("halfline_step")
        assert quotient(step, 0.0, 1.0, -1.0) == pytest.approx(0.5)

    def test_tent_slope(self):
        tent = make_standard("tent")
        assert quotient(tent, 0.0, 0.0, 0.5) == pytest.approx(-1.0)

    def test_ramp_constant_slope(self):
        ramp = make_standard("linear_ramp(3)")
        assert abs(quotient(ramp, 0.0, 0.1, 0.3)) == pytest.approx(3.0)

    def test_coincident_points_rejected(self):
        tent = make_standard("tent")
        with pytest.raises(ValueError):
            quotient(tent, 0.0, 0.3, 0.3)


class TestClosedFormOracle:
    @pytest.mark.parametrize("gamma", [1.0, -2.0])
    @pytest.mark.parametrize("lam", [0.25, 4.0])
    def test_halfline_step(self, gamma, lam):
        step = make_standard("halfline_step")
        est = nu_measure(LevelSetQuery(u=step, params=P(gamma), lam=lam))
        assert est.value == pytest.approx(halfline_closed_form(gamma, lam), rel=0.01)

    def test_constant_function_measures_zero(self):
        from slopelab.catalog import TestFunction

        const = TestFunction(
            id="const",
            dim=1,
            eval=lambda x: np.full_like(np.asarray(x, dtype=float), 3.0),
            grad=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            support=((0.0, 1.0),),
            compact_support=False,
            sup_norm=3.0,
            plateau_left=3.0,
            plateau_right=3.0,
            lip=0.0,
        )
        est = nu_measure(LevelSetQuery(u=const, params=P(-2.0), lam=0.5))
        assert est.value == 0.0


def riemann_with_tail_oracle(u, gamma, b, lam, h_max, n=4096):
    """Independent brute-force (x, h) Riemann sum plus an analytic far field."""
    lo, hi = u.support[0]
    beta = 1.0 + b
    x_lo, x_hi = lo - h_max, hi
    xs = x_lo + (np.arange(n) + 0.5) * (x_hi - x_lo) / n
    dx = (x_hi - x_lo) / n
    dh = h_max / n
    core = 0.0
    ux = u.eval(xs)
    for j in range(0, n, 256):
        hs = (np.arange(j, min(j + 256, n)) + 0.5) * dh
        member = np.abs(u.eval(xs[:, None] + hs[None, :]) - ux[:, None]) > lam * hs[None, :] ** beta
        core += float((member * hs ** (gamma - 1.0)).sum()) * dx * dh
    # far field: the partner of any member pair beyond h_max sits outside the
    # support, so membership is u's own value against lambda h^beta
    grid = np.linspace(lo, hi, 20001)
    v = np.abs(u.eval(grid))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if beta > 0:
            upper = np.where(v > 0, (v / lam) ** (1.0 / beta), h_max)
            w = np.where(upper > h_max, (upper**gamma - h_max**gamma) / gamma, 0.0)
        elif beta == 0:
            w = np.where(v > lam, h_max**gamma / abs(gamma), 0.0)
        else:
            lower = np.where(v > 0, np.maximum((v / lam) ** (1.0 / beta), h_max), np.inf)
            w = np.where(np.isfinite(lower), lower**gamma / abs(gamma), 0.0)
    tail_one_sided = float(np.trapezoid(w, grid))
    return 2.0 * (core + 2.0 * tail_one_sided)


class TestBruteForceOracle:
    def test_tent_far_field_case(self):
        # gamma=-2, p=1, lambda=10: all mass beyond the support diameter
        tent = make_standard("tent")
        est = nu_measure(LevelSetQuery(u=tent, params=P(-2.0), lam=10.0))
        oracle = riemann_with_tail_oracle(tent, -2.0, -2.0, 10.0, h_max=4.0)
        assert est.value == pytest.approx(oracle, rel=0.02)
        # hand value: both orientations and both sides of integral of u^2/200
        assert est.value == pytest.approx(1.0 / 600.0, rel=0.02)

    def test_tent_core_dominated_case(self):
        tent = make_standard("tent")
        est = nu_measure(LevelSetQuery(u=tent, params=P(-2.0, p=2.0), lam=0.3))
        oracle = riemann_with_tail_oracle(tent, -2.0, -1.0, 0.3, h_max=4.5)
        assert est.value == pytest.approx(oracle, rel=0.02)

    def test_smooth_bump_case(self):
        bump = make_standard("smooth_bump")
        est = nu_measure(LevelSetQuery(u=bump, params=P(-0.5), lam=0.2))
        oracle = riemann_with_tail_oracle(bump, -0.5, -0.5, 0.2, h_max=5.0)
        assert est.value == pytest.approx(oracle, rel=0.02)


class TestTruncation:
    def test_empty_annulus(self):
        tent = make_standard("tent")
        est = nu_measure_truncated(
            LevelSetQuery(u=tent, params=P(-2.0), lam=1.0), 0.5, 0.5
        )
        assert est.value == 0.0

    def test_truncation_exhausts_the_full_measure(self):
        tent = make_standard("tent")
        q = LevelSetQuery(u=tent, params=P(-2.0, p=2.0), lam=0.3)
        full = nu_measure(q).value
        wide = nu_measure_truncated(q, 1e-9, 1e6).value
        assert wide == pytest.approx(full, rel=0.01)

    def test_annulus_monotone_in_width(self):
        tent = make_standard("tent")
        q = LevelSetQuery(u=tent, params=P(0.0), lam=0.5)
        vals = [nu_measure_truncated(q, 2.0**-k, 1.0).value for k in (4, 6, 8)]
        assert vals[0] < vals[1] < vals[2]


class TestInvariants:
    def test_monotone_in_lambda(self):
        tent = make_standard("tent")
        lams = np.geomspace(0.05, 2.0, 8)
        vals = [
            nu_measure(LevelSetQuery(u=tent, params=P(-2.0), lam=float(l))).value
            for l in lams
        ]
        for a, b in zip(vals, vals[1:]):
            assert b <= a * (1.0 + 1e-9) + 1e-12

    def test_negation_invariance_is_exact(self):
        tent = make_standard("tent")
        q1 = LevelSetQuery(u=tent, params=P(-0.5), lam=0.1)
        q2 = LevelSetQuery(u=negate(tent), params=P(-0.5), lam=0.1)
        assert nu_measure(q1).value == nu_measure(q2).value

    def test_reflection_invariance_within_quadrature(self):
        tent = make_standard("tent")
        v1 = nu_measure(LevelSetQuery(u=tent, params=P(-0.5), lam=0.1)).value
        v2 = nu_measure(LevelSetQuery(u=reflect(tent), params=P(-0.5), lam=0.1)).value
        assert v2 == pytest.approx(v1, rel=1e-4)

    def test_dilation_identity(self):
        # measure of a rescaled block equals the scale factor to the power
        # 1 + gamma times the unit-scale measure at the transferred threshold
        gamma, t = -0.5, 16.0
        tent = make_standard("tent")
        lam = 0.05
        lhs = nu_measure(LevelSetQuery(u=dilate(tent, t), params=P(gamma), lam=lam)).value
        rhs = t ** (1.0 + gamma) * nu_measure(
            LevelSetQuery(u=tent, params=P(gamma), lam=lam * t ** (1.0 + gamma))
        ).value
        assert lhs == pytest.approx(rhs, rel=0.02)

    def test_repeat_calls_bit_identical(self):
        tent = make_standard("tent")
        q = LevelSetQuery(u=tent, params=P(1.0), lam=3.0)
        assert nu_measure(q).value == nu_measure(q).value


class TestSentinels:
    def test_zero_exponent_below_lipschitz_diverges(self):
        tent = make_standard("tent")
        est = nu_measure(LevelSetQuery(u=tent, params=P(0.0), lam=0.5))
        assert est.infinite
        assert "probe" in est.diagnostics or "reason" in est.diagnostics

    def test_zero_exponent_above_lipschitz_vanishes(self):
        tent = make_standard("tent")
        est = nu_measure(LevelSetQuery(u=tent, params=P(0.0), lam=1.5))
        assert est.value == 0.0

    def test_step_diverges_at_gamma_minus_one(self):
        step = make_standard("halfline_step")
        est = nu_measure(LevelSetQuery(u=step, params=P(-1.0), lam=0.5))
        assert est.infinite

    def test_indicator_diverges_at_gamma_minus_one_below_jump(self):
        ind = make_standard("interval_indicator(1)")
        est = nu_measure(LevelSetQuery(u=ind, params=P(-1.0), lam=0.5))
        assert est.infinite
        est2 = nu_measure(LevelSetQuery(u=ind, params=P(-1.0), lam=1.5))
        assert math.isfinite(est2.value)

    def test_budget_error_carries_partial(self):
        tent = make_standard("tent")
        with pytest.raises(BudgetExceededError) as err:
            nu_measure(
                LevelSetQuery(u=tent, params=P(1.0), lam=8.0, rel_tol=1e-6, budget=2000)
            )
        assert err.value.partial.value >= 0.0
