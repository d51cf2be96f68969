"""Shared fixtures: the standard system constants and toy/random targets."""

import numpy as np
import pytest

from radarpower import scenario
from radarpower.radar_model import RadarSystemParams, TargetPhysics


@pytest.fixture(scope="session")
def table_sys() -> RadarSystemParams:
    """Standard radar constants with an explicit floor for 20-target scenarios."""
    p = RadarSystemParams()
    return p.with_min_power(0.05 * p.total_power / 20)


@pytest.fixture(scope="session")
def phys_50km() -> TargetPhysics:
    return TargetPhysics(range_m=50e3, azimuth_rad=0.7, rcs_m2=5.0, weight=1.0)


def make_toy_target(
    prior=None,
    meas=None,
    weight=1.0,
    range_m=50e3,
    azimuth_rad=0.7,
    sigma_p=1.0,
    sigma_v=1.0,
) -> scenario.Target:
    """Target with hand-picked information matrices (defaults: I4 prior,
    unit position-only measurement info)."""
    j_prior = np.eye(4) if prior is None else np.asarray(prior, dtype=float)
    j_d = np.diag([1.0, 0.0, 1.0, 0.0]) if meas is None else np.asarray(meas, dtype=float)
    return scenario.Target(
        phys=TargetPhysics(range_m=range_m, azimuth_rad=azimuth_rad, rcs_m2=1.0, weight=weight),
        sigma_p=sigma_p,
        sigma_v=sigma_v,
        speed_mps=100.0,
        heading_rad=0.0,
        j_prior=j_prior,
        j_d=j_d,
    )


def make_toy_scenario(targets, total_power=6.0, min_power=0.0, seed=0) -> scenario.ScenarioInstance:
    sys = RadarSystemParams(total_power=total_power, min_power=min_power)
    return scenario.ScenarioInstance(sys=sys, targets=list(targets), seed=seed, label="eval")


def random_targets(seed: int, n: int):
    """Targets drawn from the standard distributions (physics only)."""
    return scenario.generate(seed, n).targets
