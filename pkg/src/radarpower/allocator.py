"""Closed-form power allocation: scoring functions, baselines, and the
deterministic transform that maps positive scores to a feasible allocation.

Scorers consume the N x 20 feature matrix and return positive per-target
scores; the transform then assigns

    p_i = p_min                      for targets whose proportional share
                                     falls below the floor (the clamp set)
    p_i = P_res * S_i / sum_free S   for the rest,

iterating the clamp step to a fixed point because redistributing the
residual power can push further targets below the floor.  The result sums
to P exactly and respects p_i >= p_min with no iteration over candidate
power levels, so the whole pipeline stays O(N) per pass.
"""

from __future__ import annotations

import numpy as np

from . import features as features_mod
from .errors import DegenerateScenarioError, DomainError, GeometryError, InfeasibleScenarioError

SCORE_FLOOR = 1e-6
DISCOVERED_EXPONENT = 0.495
SUBOPTIMAL_EXPONENT = 0.493
SUBOPTIMAL_CLIFF_MIX = 0.35
SUBOPTIMAL_RATIO_GAIN = 0.082

# clamp tolerance: shares within 1e-12 * P of the floor are NOT clamped
CLAMP_TOL_FRACTION = 1e-12


def score_seed(features: np.ndarray) -> np.ndarray:
    """Demand-only seed score D^(2/3)."""
    f = _check_features(features)
    return np.cbrt(f[:, 8]) ** 2


def score_discovered(features: np.ndarray) -> np.ndarray:
    """Mean-normalized demand-times-marginal-benefit score.

    S = max((eta * zeta)^0.495, 1e-6) with eta = D / mean(D) and
    zeta = M_base / mean(M_base); the floor keeps every score strictly
    positive.
    """
    f = _check_features(features)
    d_mean, mb_mean = f[0, 9], f[0, 13]
    if not (d_mean > 0.0 and mb_mean > 0.0):
        raise DegenerateScenarioError("demand / marginal-benefit means must be positive")
    base = (f[:, 8] / d_mean) * (f[:, 12] / mb_mean)
    return _floored_power(base, DISCOVERED_EXPONENT)


def score_suboptimal(features: np.ndarray) -> np.ndarray:
    """Richer variant mixing the cliff marginal benefit and information ratio.

    S = max((mu * beta * A)^0.493, 1e-6) with mu = D / mean(D),
    beta = M_base / mean(M_base) + 0.35 * M_cliff / mean(M_cliff), and
    A = 1 + 0.082 * tanh(X8 / mean(D)).
    """
    f = _check_features(features)
    d_mean, mb_mean, mc_mean = f[0, 9], f[0, 13], f[0, 17]
    if not (d_mean > 0.0 and mb_mean > 0.0 and mc_mean > 0.0):
        raise DegenerateScenarioError("feature means must be positive")
    mu = f[:, 8] / d_mean
    beta = f[:, 12] / mb_mean + SUBOPTIMAL_CLIFF_MIX * f[:, 16] / mc_mean
    amp = 1.0 + SUBOPTIMAL_RATIO_GAIN * np.tanh(f[:, 7] / d_mean)
    return _floored_power(mu * beta * amp, SUBOPTIMAL_EXPONENT)


def _floored_power(base: np.ndarray, exponent: float) -> np.ndarray:
    out = np.where(base > 0.0, np.power(np.maximum(base, 1e-300), exponent), 0.0)
    return np.maximum(out, SCORE_FLOOR)


def _check_features(features: np.ndarray) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    if f.ndim != 2 or f.shape[1] != features_mod.N_FEATURES:
        raise DomainError(f"expected an (N, {features_mod.N_FEATURES}) feature matrix, got {f.shape}")
    return f


# ---------------------------------------------------------------------------
# the constraint-satisfying transform
# ---------------------------------------------------------------------------


def transform(scores: np.ndarray, total_power: float, min_power: float) -> np.ndarray:
    """Map positive scores to an allocation with sum(p) = P and p >= p_min.

    Clamp-and-renormalize to a fixed point: at most N passes, one in the
    typical case.  Feasibility is preserved at every pass (the residual
    after clamping k targets is at least (N - k) * p_min), so at least one
    target always stays unclamped.
    """
    s = np.asarray(scores, dtype=float)
    n = s.size
    if n == 0:
        raise DomainError("empty score vector")
    if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
        raise DomainError("scores must be finite and strictly positive")
    if n * min_power > total_power * (1.0 + 1e-12):
        raise InfeasibleScenarioError(
            f"N * p_min = {n * min_power:.6g} W exceeds P = {total_power:.6g} W"
        )
    tol = CLAMP_TOL_FRACTION * total_power
    clamped = np.zeros(n, dtype=bool)
    for _ in range(n):
        free = ~clamped
        residual = total_power - min_power * np.count_nonzero(clamped)
        shares = residual * s[free] / np.sum(s[free])
        below = shares < min_power - tol
        if not below.any():
            break
        clamped[np.flatnonzero(free)[below]] = True

    p = np.full(n, min_power, dtype=float)
    free = ~clamped
    if free.any():
        residual = total_power - min_power * np.count_nonzero(clamped)
        p[free] = residual * s[free] / np.sum(s[free])
    return p


def check_allocation(p: np.ndarray, total_power: float, min_power: float) -> None:
    """Assert the allocation invariants (exact budget, floor respected)."""
    p = np.asarray(p, dtype=float)
    if abs(float(np.sum(p)) - total_power) > 1e-9 * total_power:
        raise DomainError(f"allocation sums to {np.sum(p)!r}, expected {total_power!r}")
    if np.any(p < min_power - 1e-12 * total_power):
        raise DomainError("allocation violates the per-target power floor")


# ---------------------------------------------------------------------------
# allocators
# ---------------------------------------------------------------------------


def allocate_uniform(scen) -> np.ndarray:
    """Equal share P/N for every target."""
    pbar = scen.sys.total_power / scen.n
    if pbar < scen.min_power:
        raise InfeasibleScenarioError("P/N below the per-target floor")
    return np.full(scen.n, pbar)


def allocate_high_snr(scen) -> np.ndarray:
    """Measurement-information-only proportional rule.

    Assumes the measurement dominates the prior, so the score depends only
    on the weight and the per-watt information: (w * sqrt(Tr_p(Xi^-1)))^(2/3),
    normalized to the budget and passed through the floor transform.
    """
    ts = scen.target_set
    det = ts.xi11 * ts.xi33 - ts.xi13**2
    if np.any(det <= 0.0):
        raise GeometryError("singular measurement-information position block")
    trace_inv = (ts.xi11 + ts.xi33) / det
    scores = np.cbrt(ts.weights * np.sqrt(trace_inv)) ** 2
    return transform(scores, scen.sys.total_power, scen.min_power)


def allocate_closed_form(scen, scorer="discovered") -> np.ndarray:
    """Full pipeline: feature extraction, scoring, feasibility transform."""
    score_fn = get_scorer(scorer) if isinstance(scorer, str) else scorer
    f = features_mod.feature_matrix(scen)
    scores = score_fn(f)
    return transform(scores, scen.sys.total_power, scen.min_power)


SCORERS = {
    "seed": score_seed,
    "discovered": score_discovered,
    "suboptimal": score_suboptimal,
}


def get_scorer(name: str):
    try:
        return SCORERS[name]
    except KeyError:
        raise DomainError(f"unknown scorer {name!r}; expected one of {sorted(SCORERS)}") from None


def allocate_by_name(scen, name: str) -> np.ndarray:
    """Dispatch the CLI allocator names, including the uniform/high-snr baselines."""
    if name == "uniform":
        return allocate_uniform(scen)
    if name == "high-snr":
        return allocate_high_snr(scen)
    return allocate_closed_form(scen, name)
