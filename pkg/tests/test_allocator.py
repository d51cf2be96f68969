"""Scorers, the feasibility transform, and the closed-form pipeline."""

import numpy as np
import pytest

from radarpower import allocator, features, scenario
from radarpower.allocator import (
    allocate_closed_form,
    allocate_high_snr,
    allocate_uniform,
    check_allocation,
    score_discovered,
    score_seed,
    score_suboptimal,
    transform,
)
from radarpower.errors import DegenerateScenarioError, DomainError, InfeasibleScenarioError

from conftest import make_toy_scenario, make_toy_target


def _row(n=1, **overrides):
    """Feature matrix with controlled demand/benefit columns."""
    f = np.ones((n, 20))
    f[:, 0] = n
    for col, val in overrides.items():
        f[:, col] = val
    return f


class TestScoreSeed:
    def test_cube_root_squares(self):
        f = _row(2)
        f[:, 8] = [1.0, 8.0]
        np.testing.assert_allclose(score_seed(f), [1.0, 4.0], rtol=1e-14)

    def test_equal_demand_equal_scores(self):
        f = _row(3)
        f[:, 8] = 5.5
        s = score_seed(f)
        assert np.ptp(s) == 0.0

    def test_27_gives_9(self):
        f = _row(1)
        f[:, 8] = 27.0
        assert score_seed(f)[0] == pytest.approx(9.0, rel=1e-14)


class TestScoreDiscovered:
    def test_identical_targets_score_one(self):
        f = _row(4)
        f[:, 8] = 3.3
        f[:, 9] = 3.3
        f[:, 12] = 0.07
        f[:, 13] = 0.07
        np.testing.assert_allclose(score_discovered(f), 1.0, rtol=1e-14)

    def test_zero_base_hits_floor(self):
        f = _row(2)
        f[:, 8] = [0.0, 2.0]
        f[:, 9] = 1.0
        f[:, 12] = [1.0, 1.0]
        f[:, 13] = 1.0
        s = score_discovered(f)
        assert s[0] == allocator.SCORE_FLOOR

    def test_power_value(self):
        f = _row(1)
        f[:, 8] = 4.0
        f[:, 9] = 1.0
        f[:, 12] = 1.0
        f[:, 13] = 1.0
        assert score_discovered(f)[0] == pytest.approx(1.9861849908740719, rel=1e-12)

    def test_degenerate_means_rejected(self):
        f = _row(2)
        f[:, 9] = 0.0
        with pytest.raises(DegenerateScenarioError):
            score_discovered(f)

    def test_scale_invariance_in_demand_and_benefit(self):
        scen = scenario.generate(71, 14)
        f = features.feature_matrix(scen)
        base = score_discovered(f)
        scaled = f.copy()
        scaled[:, 8:12] *= 7.3   # demand block: values and stats together
        scaled[:, 12:16] *= 0.013
        np.testing.assert_allclose(score_discovered(scaled), base, rtol=1e-12)


class TestScoreSuboptimal:
    def test_identical_targets_near_zero_ratio(self):
        f = _row(3)
        f[:, 8] = 2.0   # D
        f[:, 9] = 2.0
        f[:, 12] = 0.5  # M_base
        f[:, 13] = 0.5
        f[:, 16] = 0.9  # M_cliff
        f[:, 17] = 0.9
        f[:, 7] = 1e-12  # X8 / mean(D) ~ 0  ->  A = 1
        s = score_suboptimal(f)
        np.testing.assert_allclose(s, 1.35**0.493, rtol=1e-10)

    def test_tanh_saturation(self):
        f = _row(1)
        f[:, 8] = f[:, 9] = 1.0
        f[:, 12] = f[:, 13] = 1.0
        f[:, 16] = f[:, 17] = 1.0
        f[:, 7] = 1e9
        expected = (1.35 * 1.082) ** 0.493
        assert score_suboptimal(f)[0] == pytest.approx(expected, rel=1e-12)

    def test_permutes_with_targets(self):
        scen = scenario.generate(73, 10)
        f = features.feature_matrix(scen)
        s = score_suboptimal(f)
        perm = np.random.default_rng(0).permutation(10)
        np.testing.assert_allclose(score_suboptimal(f[perm]), s[perm], rtol=1e-14)


class TestTransform:
    def test_no_clamping(self):
        np.testing.assert_allclose(transform(np.array([9.0, 1.0]), 10.0, 1.0), [9.0, 1.0])

    def test_single_clamp_hand_case(self):
        np.testing.assert_allclose(transform(np.array([99.0, 1.0]), 10.0, 1.0), [9.0, 1.0])

    def test_uniform_scores_uniform_power(self):
        for p_min in (0.0, 0.5, 2.0):
            p = transform(np.ones(5), 10.0, p_min)
            np.testing.assert_allclose(p, 2.0, rtol=1e-14)

    def test_cascaded_clamping_fixed_point(self):
        # one pass clamps the small score; redistribution then pushes the
        # middle one below the floor too
        s = np.array([100.0, 10.0, 1.0])
        p = transform(s, 111.0, 10.0)
        check_allocation(p, 111.0, 10.0)
        assert p[2] == 10.0
        np.testing.assert_allclose(p.sum(), 111.0)

    def test_idempotent_on_feasible_shares(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = rng.integers(2, 40)
            total = 10.0 ** rng.uniform(0, 7)
            p_min = rng.uniform(0.0, total / n)
            s = rng.uniform(0.01, 10.0, size=n)
            p = transform(s, total, p_min)
            check_allocation(p, total, p_min)
            again = transform(p, total, p_min)
            np.testing.assert_allclose(again, p, rtol=1e-12, atol=1e-12 * total)

    def test_invariants_random_and_adversarial(self):
        rng = np.random.default_rng(6)
        for trial in range(10_000):
            n = int(rng.integers(1, 25))
            total = 10.0 ** rng.uniform(-2, 7)
            p_min = total / n * rng.uniform(0.0, 1.0)
            kind = trial % 4
            if kind == 0:
                s = rng.uniform(1e-6, 1.0, size=n)
            elif kind == 1:
                # adversarial: many shares right at the threshold
                s = np.full(n, p_min if p_min > 0 else 1.0)
                if n > 1:
                    s[0] *= 1.0 + rng.uniform(-1e-9, 1e-9)
            elif kind == 2:
                s = 10.0 ** rng.uniform(-6, 6, size=n)
            else:
                s = np.full(n, 1e-6)
            p = transform(s, total, p_min)
            check_allocation(p, total, p_min)

    def test_infeasible_rejected(self):
        with pytest.raises(InfeasibleScenarioError):
            transform(np.ones(3), 1.0, 0.5)

    def test_nonpositive_scores_rejected(self):
        with pytest.raises(DomainError):
            transform(np.array([1.0, 0.0]), 1.0, 0.0)
        with pytest.raises(DomainError):
            transform(np.array([1.0, np.nan]), 1.0, 0.0)

    def test_exactly_at_threshold_not_clamped(self):
        # shares land exactly on p_min: nothing is clamped, shares are kept
        p = transform(np.array([1.0, 1.0]), 4.0, 2.0)
        np.testing.assert_allclose(p, [2.0, 2.0])


class TestUniform:
    def test_two_targets(self):
        scen = make_toy_scenario([make_toy_target(), make_toy_target()], total_power=10.0)
        np.testing.assert_allclose(allocate_uniform(scen), [5.0, 5.0])

    def test_sums_to_total(self):
        scen = scenario.generate(79, 17)
        assert allocate_uniform(scen).sum() == pytest.approx(scen.sys.total_power, rel=1e-14)

    def test_paper_scale(self):
        scen = scenario.generate(83, 4, sys=scenario.RadarSystemParams(min_power=0.0))
        np.testing.assert_allclose(allocate_uniform(scen), 5e5)


class TestHighSnr:
    def test_proportionality_two_targets(self):
        # (w sqrt(T))^(2/3) in ratio 4:1 and p_min = 0 -> shares 0.8 / 0.2
        t1 = make_toy_target(meas=np.diag([1.0, 0, 1.0, 0]), weight=8.0)
        t2 = make_toy_target(meas=np.diag([1.0, 0, 1.0, 0]), weight=1.0)
        scen = make_toy_scenario([t1, t2], total_power=10.0, min_power=0.0)
        np.testing.assert_allclose(allocate_high_snr(scen), [8.0, 2.0], rtol=1e-12)

    def test_identical_targets_uniform(self):
        t = make_toy_target()
        scen = make_toy_scenario([t, t, t], total_power=9.0, min_power=0.5)
        np.testing.assert_allclose(allocate_high_snr(scen), 3.0, rtol=1e-14)

    def test_ignores_priors(self):
        base = scenario.generate(89, 8)
        perturbed = scenario.ScenarioInstance(
            sys=base.sys,
            targets=[
                scenario.Target(
                    phys=t.phys,
                    sigma_p=t.sigma_p * 13.0,
                    sigma_v=t.sigma_v * 0.3,
                    speed_mps=t.speed_mps,
                    heading_rad=t.heading_rad,
                    j_prior=t.j_prior / 169.0,
                    j_d=t.j_d,
                )
                for t in base.targets
            ],
            seed=base.seed,
            label=base.label,
        )
        np.testing.assert_allclose(allocate_high_snr(perturbed), allocate_high_snr(base), rtol=1e-14)

    def test_respects_floor(self):
        scen = scenario.generate(97, 20)
        p = allocate_high_snr(scen)
        check_allocation(p, scen.sys.total_power, scen.min_power)


class TestClosedFormPipeline:
    def test_identical_targets_uniform(self):
        t = make_toy_target()
        scen = make_toy_scenario([t, t, t, t], total_power=8.0, min_power=0.1)
        for scorer in ("seed", "discovered", "suboptimal"):
            np.testing.assert_allclose(allocate_closed_form(scen, scorer), 2.0, rtol=1e-12)

    def test_valid_allocation_on_random_scenarios(self):
        for seed in range(1000):
            scen = scenario.generate(20_000 + seed, int(np.random.default_rng(seed).integers(2, 31)))
            p = allocate_closed_form(scen, "discovered")
            check_allocation(p, scen.sys.total_power, scen.min_power)

    def test_weight_scaling_invariance(self):
        base = scenario.generate(101, 12)
        scaled = scenario.ScenarioInstance(
            sys=base.sys,
            targets=[
                scenario.Target(
                    phys=scenario.TargetPhysics(
                        range_m=t.phys.range_m,
                        azimuth_rad=t.phys.azimuth_rad,
                        rcs_m2=t.phys.rcs_m2,
                        weight=t.phys.weight * 4.5,
                    ),
                    sigma_p=t.sigma_p,
                    sigma_v=t.sigma_v,
                    speed_mps=t.speed_mps,
                    heading_rad=t.heading_rad,
                    j_prior=t.j_prior,
                    j_d=t.j_d,
                )
                for t in base.targets
            ],
            seed=base.seed,
            label=base.label,
        )
        np.testing.assert_allclose(
            allocate_closed_form(scaled, "discovered"),
            allocate_closed_form(base, "discovered"),
            rtol=1e-12,
        )

    def test_unknown_scorer_rejected(self):
        scen = scenario.generate(1, 3)
        with pytest.raises(DomainError):
            allocate_closed_form(scen, "magic")
