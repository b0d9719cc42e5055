"""Experiment layer: classification, sweeps, recovery, growth, energy."""

import math

import numpy as np
import pytest

from slopelab import analysis
from slopelab.analysis import (
    InconclusiveError,
    bbm_functional,
    cantor_growth,
    detect_divergence,
    estimate_lipschitz,
    geometric_grid,
    mollified_indicator_growth,
    sweep,
    weak_norm,
)
from slopelab import catalog
from slopelab.catalog import make_standard
from slopelab.params import Params


def P(gamma, p=1.0):
    return Params(dim=1, p=p, gamma=gamma)


CONST = catalog.TestFunction(
    id="const",
    dim=1,
    eval=lambda x: np.full_like(np.asarray(x, dtype=float), 1.0),
    grad=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    support=((0.0, 1.0),),
    compact_support=False,
    sup_norm=1.0,
    plateau_left=1.0,
    plateau_right=1.0,
    grad_l1=0.0,
    grad_bv=0.0,
    grad_lp=lambda p: 0.0,
    lip=0.0,
)


class TestDetectDivergence:
    def test_constant_values_converge(self):
        lams = np.geomspace(1, 2**-10, 8)
        assert detect_divergence(lams, np.full(8, 2.0)) == "converged"

    def test_growing_values_diverge(self):
        lams = np.geomspace(1, 2**-10, 8)
        vals = np.linspace(1, 10, 8)
        assert detect_divergence(lams, vals) == "diverging"

    def test_all_zero_converges(self):
        lams = np.geomspace(1, 2**-10, 8)
        assert detect_divergence(lams, np.zeros(8)) == "converged"

    def test_infinities_diverge(self):
        lams = np.geomspace(1, 2**-10, 6)
        vals = np.array([1.0, 2.0, math.inf, math.inf, math.inf, math.inf])
        assert detect_divergence(lams, vals) == "diverging"

    def test_needs_six_points(self):
        with pytest.raises(ValueError):
            detect_divergence([1, 2, 3], [1, 1, 1])


class TestSweep:
    def test_constant_function_sweeps_to_zero(self):
        s = sweep(CONST, P(1.0), geometric_grid(1, 64, 7))
        assert s.classification == "converged"
        assert s.limit_estimate == 0.0
        assert s.sup_estimate == 0.0

    def test_sandwich_limit_below_sup(self):
        tent = make_standard("tent")
        s = sweep(tent, P(1.0), geometric_grid(4, 4096, 11))
        assert s.classification == "converged"
        assert s.limit_estimate <= s.sup_estimate * (1.0 + 1e-9)

    def test_wrong_direction_decays_to_zero(self):
        tent = make_standard("tent")
        s = sweep(tent, P(1.0), geometric_grid(1.0, 2.0**-10, 6))
        assert s.values[-1] < 0.05 * max(s.values[0], 1e-30)

    def test_measure_monotone_along_grid(self):
        tent = make_standard("tent")
        s = sweep(tent, P(-2.0, p=2.0), geometric_grid(1.0, 2.0**-6, 8))
        raw = s.values / s.lambdas ** 2.0
        assert np.all(np.diff(raw) >= -1e-9 * raw[:-1] - 1e-12)

    def test_step_sweep_is_constant_hence_converged(self):
        step = make_standard("halfline_step")
        s = sweep(step, P(-2.0), geometric_grid(1.0, 2.0**-8, 7))
        assert s.classification == "converged"
        assert s.limit_estimate == pytest.approx(2.0, rel=1e-6)

    def test_analytic_tail_never_exceeds_value(self):
        from slopelab.measure import LevelSetQuery, nu_measure

        tent = make_standard("tent")
        for gamma, lam in ((-2.0, 0.3), (1.0, 2.0), (-3.0, 0.05)):
            est = nu_measure(LevelSetQuery(u=tent, params=P(gamma), lam=lam))
            assert est.tail_analytic <= est.value + 1e-15


class TestLipschitzRecovery:
    def test_constant_is_zero(self):
        assert estimate_lipschitz(CONST) == 0.0

    def test_scaled_ramp(self):
        ramp = make_standard("linear_ramp(3)")
        assert estimate_lipschitz(ramp) == pytest.approx(3.0, rel=0.10)


class TestWeakNorm:
    def test_step_is_exactly_flat(self):
        step = make_standard("halfline_step")
        wn = weak_norm(step, P(-2.0), count=17)
        assert wn == pytest.approx(2.0, rel=1e-6)

    def test_constant_gives_zero(self):
        assert weak_norm(CONST, P(1.0), count=9) == 0.0

    def test_gate_bounds_for_smooth_entries(self):
        tent = make_standard("tent")
        for gamma in (2.0, -3.0):
            wn = weak_norm(tent, P(gamma), count=17)
            limit = 2.0 / abs(gamma) * tent.grad_l1
            assert math.isfinite(wn)
            assert wn >= 0.95 * limit
            assert wn <= 100.0 * tent.grad_l1


class TestGrowthFamilies:
    def test_cantor_floor_matches_closed_form(self):
        from slopelab.analysis import rectangle_floor_measure
        from slopelab.selfsimilar import corner_rectangle_weight

        engine = rectangle_floor_measure(-0.5, 1.0, 0.25)
        closed = corner_rectangle_weight(-0.5, 0.25)
        assert engine == pytest.approx(closed, rel=0.02)

    def test_cantor_growth_small_range(self):
        seq = cantor_growth(-0.5, 1.0, range(1, 4))
        assert np.all(np.diff(seq.values) > 0)
        for r in seq.records:
            assert r.value >= 0.98 * r.floor

    def test_admissibility_guard_for_p_above_one(self):
        with pytest.raises(ValueError):
            cantor_growth(-0.5, 2.0, range(1, 8))

    def test_mollified_cap_for_p_above_one(self):
        with pytest.raises(ValueError):
            mollified_indicator_growth(2.0, range(2, 9))

    def test_mollified_witness_region_membership(self):
        from slopelab.catalog import mollified_indicator
        from slopelab.measure import quotient

        m = 4
        v = mollified_indicator(m, dim=1)
        rng = np.random.default_rng(31)
        xs = rng.uniform(-(1 - 2.0**-m), 1 - 2.0**-m, 100)
        ys = rng.uniform(1 + 2.0**-m, 2.0, 100) * rng.choice([-1, 1], 100)
        for x, y in zip(xs, ys):
            assert abs(quotient(v, -1.0, x, y)) > 1.0


class TestEnergyCurve:
    def test_constant_is_zero(self):
        curve = bbm_functional(CONST, 1.0, 2.0, [0.2, 0.1])
        assert curve.values == (0.0, 0.0)

    def test_indicator_diverges_for_p_two(self):
        ind = make_standard("interval_indicator(1)")
        curve = bbm_functional(ind, 2.0, 2.0, [0.2, 0.1])
        assert all(math.isinf(v) for v in curve.values)

    def test_s_domain_validated(self):
        with pytest.raises(ValueError):
            bbm_functional(make_standard("tent"), 1.0, 2.0, [0.2, 1.5])


class TestRegimeGate:
    def test_unbounded_family_ratio_grows(self):
        # the weak-type ratio against the gradient mass grows along the
        # mollified family (total variation stays 4 while the measure grows)
        seq = mollified_indicator_growth(1.0, (2, 5))
        ratios = seq.values / 4.0
        assert ratios[1] > ratios[0]
