"""Feature extraction: definitional identities, statistics, and gradient ties."""

import math

import numpy as np
import pytest

from radarpower import features, radar_model, scenario
from radarpower.errors import NumericalError
from radarpower.features import demand_factor, feature_matrix, marginal_benefit

from conftest import make_toy_scenario, make_toy_target


class TestDemandFactor:
    def test_equals_bcrlb_at_equal_share(self):
        scen = scenario.generate(3, 12)
        for t in scen.targets:
            expected = radar_model.bcrlb(
                t.j_prior, t.j_d, scen.sys.total_power / scen.n, t.phys.weight
            )
            assert demand_factor(t, scen.sys, scen.n) == expected

    def test_linear_in_weight(self):
        base = make_toy_target(weight=1.0)
        double = make_toy_target(weight=2.0)
        scen = make_toy_scenario([base, double], total_power=6.0)
        d1 = demand_factor(base, scen.sys, 2)
        d2 = demand_factor(double, scen.sys, 2)
        assert d2 == pytest.approx(2.0 * d1, rel=1e-14)

    def test_diagonal_toy_value(self):
        t = make_toy_target()
        scen = make_toy_scenario([t, t], total_power=6.0)  # pbar = 3
        assert demand_factor(t, scen.sys, 2) == pytest.approx(math.sqrt(0.5), rel=1e-14)


class TestMarginalBenefit:
    def test_matches_finite_difference_slope(self):
        scen = scenario.generate(17, 10)
        for t in scen.targets[:5]:
            at = scen.sys.total_power / scen.n
            h = 1e-5 * at
            hi = radar_model.bcrlb(t.j_prior, t.j_d, at + h, t.phys.weight)
            lo = radar_model.bcrlb(t.j_prior, t.j_d, at - h, t.phys.weight)
            fd_slope = (hi - lo) / (2 * h)
            assert marginal_benefit(t, scen.sys, at) == pytest.approx(-fd_slope, rel=1e-6)

    def test_strictly_positive(self):
        scen = scenario.generate(21, 30)
        pbar = scen.sys.total_power / scen.n
        for t in scen.targets:
            assert marginal_benefit(t, scen.sys, pbar) > 0.0

    def test_cliff_at_least_baseline(self):
        # convexity: the bound's slope magnitude shrinks as power grows
        scen = scenario.generate(23, 20)
        pbar = scen.sys.total_power / scen.n
        p_cliff = features.cliff_power(scen.sys)
        assert p_cliff <= pbar
        for t in scen.targets:
            assert marginal_benefit(t, scen.sys, p_cliff) >= marginal_benefit(t, scen.sys, pbar)

    def test_negated_gradient_identity(self):
        scen = scenario.generate(29, 8)
        pbar = scen.sys.total_power / scen.n
        grad = radar_model.objective_gradient(scen, np.full(scen.n, pbar))
        for i, t in enumerate(scen.targets):
            assert marginal_benefit(t, scen.sys, pbar) == pytest.approx(-grad[i], rel=1e-10)


class TestFeatureMatrix:
    def test_shape_and_finite(self):
        scen = scenario.generate(31, 25)
        f = feature_matrix(scen)
        assert f.shape == (25, 20)
        assert np.isfinite(f).all()

    def test_single_target_statistics(self):
        scen = scenario.generate(37, 1)
        f = feature_matrix(scen)
        x9, x10, x11, x12 = f[0, 8:12]
        assert x10 == x9 and x11 == x9 and x12 == 0.0

    def test_stat_triples_constant_across_rows(self):
        scen = scenario.generate(41, 18)
        f = feature_matrix(scen)
        for col in (9, 10, 11, 13, 14, 15, 17, 18, 19):
            assert np.ptp(f[:, col]) == 0.0

    def test_stats_match_per_target_columns(self):
        scen = scenario.generate(43, 18)
        f = feature_matrix(scen)
        for base in (8, 12, 16):
            col = f[:, base]
            assert f[0, base + 1] == pytest.approx(col.mean(), rel=1e-12)
            assert f[0, base + 2] == pytest.approx(col.max(), rel=1e-12)
            assert f[0, base + 3] == pytest.approx(col.std(), rel=1e-12)

    def test_reordering_targets_permutes_rows(self):
        scen = scenario.generate(47, 9)
        f = feature_matrix(scen)
        perm = [4, 1, 7, 0, 8, 2, 6, 3, 5]
        permuted = scenario.ScenarioInstance(
            sys=scen.sys,
            targets=[scen.targets[i] for i in perm],
            seed=scen.seed,
            label=scen.label,
        )
        np.testing.assert_allclose(feature_matrix(permuted), f[perm], rtol=1e-14)

    def test_duplication_changes_demand_via_pbar(self):
        # fixed P, doubled N: pbar halves, so X9 is recomputed, not reused
        scen = scenario.generate(53, 6)
        doubled = scenario.ScenarioInstance(
            sys=scen.sys.with_min_power(scen.min_power / 2),
            targets=scen.targets + scen.targets,
            seed=scen.seed,
            label=scen.label,
        )
        f2 = feature_matrix(doubled)
        assert f2[0, 0] == 12.0
        for i, t in enumerate(scen.targets):
            expected = demand_factor(t, doubled.sys, 12)
            assert f2[i, 8] == pytest.approx(expected, rel=1e-12)
            assert f2[i + 6, 8] == pytest.approx(expected, rel=1e-12)
        assert not np.allclose(f2[0, 8], feature_matrix(scen)[0, 8])

    def test_x8_information_ratio_toy(self):
        t = make_toy_target()  # I4 prior, diag(1,0,1,0) measurement info
        scen = make_toy_scenario([t], total_power=6.0)
        f = feature_matrix(scen)
        assert f[0, 7] == pytest.approx(1.0, rel=1e-14)

    def test_x5_is_full_power_snr(self):
        scen = scenario.generate(59, 5)
        f = feature_matrix(scen)
        for i, t in enumerate(scen.targets):
            expected = scen.sys.total_power * radar_model.snr_per_watt(t.phys, scen.sys)
            assert f[i, 4] == pytest.approx(expected, rel=1e-14)

    def test_x6_prior_position_variance(self):
        scen = scenario.generate(61, 5)
        f = feature_matrix(scen)
        for i, t in enumerate(scen.targets):
            assert f[i, 5] == pytest.approx(2.0 * t.sigma_p**2, rel=1e-10)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_feature_aborts_with_index(self):
        t_ok = make_toy_target()
        t_bad = make_toy_target(prior=np.diag([1e308, 1.0, 1e308, 1.0]))
        scen = make_toy_scenario([t_ok, t_bad], total_power=6.0)
        with pytest.raises(NumericalError, match="target 1"):
            feature_matrix(scen)


class TestCsv:
    def test_round_trip_via_loadtxt(self, tmp_path):
        scen = scenario.generate(67, 7)
        f = feature_matrix(scen)
        path = tmp_path / "features.csv"
        features.write_csv(f, path)
        header = path.read_text().splitlines()[0]
        assert header == ",".join(features.FEATURE_NAMES)
        back = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_allclose(back, f, rtol=1e-15)

    def test_rejects_wrong_width(self, tmp_path):
        with pytest.raises(ValueError):
            features.write_csv(np.zeros((3, 7)), tmp_path / "bad.csv")
