"""Per-target feature extraction: the 20 physically inspired scalars.

Column layout (1-indexed names X1..X20, stored 0-indexed):

    X1   total number of targets N
    X2   target range R [m]
    X3   priority weight w
    X4   radar cross section [m^2]
    X5   full-power SNR (all of P on this target)
    X6   prior position variance Tr_p(J_prior^-1) [m^2]
    X7   full-power measurement information P * Tr_p(Jd)
    X8   information ratio Tr_p(J_prior) / Tr_p(Jd)
    X9   demand factor: weighted bound at the equal share pbar = P/N [m]
    X10-X12  mean / max / population std of X9 over the scenario
    X13  baseline marginal benefit: bound decrease rate per watt at pbar
    X14-X16  mean / max / std of X13
    X17  cliff marginal benefit: same rate at the power floor
    X18-X20  mean / max / std of X17

The statistics triples are identical across all rows of one scenario; they
give each target's row scenario-level context for the scoring functions.
"""

from __future__ import annotations

import numpy as np

from . import radar_model
from .errors import NumericalError
from .radar_model import RadarSystemParams, TargetSet

N_FEATURES = 20
FEATURE_NAMES = tuple(f"X{i}" for i in range(1, N_FEATURES + 1))

# The cliff marginal benefit is evaluated at max(p_min, CLIFF_FLOOR_FRACTION*P)
# so the p_min = 0 corner keeps a single well-conditioned code path.
CLIFF_FLOOR_FRACTION = 1e-6


def cliff_power(sys: RadarSystemParams) -> float:
    """Power level at which the cliff marginal benefit is evaluated [W]."""
    p_min = sys.min_power if sys.min_power is not None else 0.0
    return max(p_min, CLIFF_FLOOR_FRACTION * sys.total_power)


def demand_factor(target, sys: RadarSystemParams, n_targets: int) -> float:
    """Weighted bound at the equal power share P/N; large values flag targets
    that are hard to track under uniform resource sharing."""
    return radar_model.bcrlb(
        target.j_prior, target.j_d, sys.total_power / n_targets, target.phys.weight
    )


def marginal_benefit(target, sys: RadarSystemParams, at: float) -> float:
    """Rate of weighted-bound reduction per extra watt, evaluated at ``at``.

    Equals the negated partial derivative of w * BCRLB(p) at p = ``at``;
    strictly positive for any valid target.
    """
    ts = TargetSet.from_matrices(
        target.j_prior[None], target.j_d[None], np.array([target.phys.weight])
    )
    return float(ts.marginal_benefit(float(at))[0])


def feature_matrix(scen) -> np.ndarray:
    """N x 20 feature matrix for a scenario (rows follow target order)."""
    ts = scen.target_set
    sys = scen.sys
    n = ts.n
    pbar = sys.total_power / n
    p_cliff = cliff_power(sys)

    out = np.empty((n, N_FEATURES))
    out[:, 0] = float(n)
    out[:, 1] = [t.phys.range_m for t in scen.targets]
    out[:, 2] = ts.weights
    out[:, 3] = [t.phys.rcs_m2 for t in scen.targets]
    out[:, 4] = [
        sys.total_power * radar_model.snr_per_watt(t.phys, sys) for t in scen.targets
    ]
    out[:, 5] = ts.trace_p_inv(0.0)
    meas_trace = ts.xi11 + ts.xi33
    out[:, 6] = sys.total_power * meas_trace
    out[:, 7] = ts.prior_trace_p / meas_trace
    out[:, 8] = ts.bcrlb(pbar)
    out[:, 12] = ts.marginal_benefit(pbar)
    out[:, 16] = ts.marginal_benefit(p_cliff)

    # blame the offending target before its value bleeds into the statistics
    per_target_cols = [1, 2, 3, 4, 5, 6, 7, 8, 12, 16]
    _check_finite(out[:, per_target_cols], per_target_cols)
    for col in (8, 12, 16):
        _fill_stats(out, col)
    _check_finite(out, range(N_FEATURES))
    return out


def _check_finite(block: np.ndarray, cols) -> None:
    bad = ~np.isfinite(block)
    if bad.any():
        target_idx, col_pos = np.argwhere(bad)[0]
        name = FEATURE_NAMES[list(cols)[col_pos]]
        raise NumericalError(f"non-finite feature {name} for target {target_idx}")


def _fill_stats(out: np.ndarray, col: int) -> None:
    values = out[:, col]
    out[:, col + 1] = values.mean()
    out[:, col + 2] = values.max()
    out[:, col + 3] = values.std()  # population (divide by N)


def write_csv(features: np.ndarray, path) -> None:
    """Write a feature matrix as CSV with the X1..X20 header row."""
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[1] != N_FEATURES:
        raise ValueError(f"expected an (N, {N_FEATURES}) matrix, got {features.shape}")
    header = ",".join(FEATURE_NAMES)
    np.savetxt(path, features, delimiter=",", header=header, comments="", fmt="%.17g")
