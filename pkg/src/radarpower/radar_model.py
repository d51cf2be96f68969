"""Radar physics and Bayesian-information math for 2D range/azimuth tracking.

Everything downstream (features, allocators, solvers, the tracking loop)
reduces to the quantities computed here:

    SNR(p)      = p * G^2 lambda^2 sigma / ((4 pi)^3 R^4 F k T0 Bn)
    Sigma(p)    = diag(gamma_r / p, gamma_theta / p)      measurement covariance
    Jd          = H^T diag(1/gamma_r, 1/gamma_theta) H    info per watt
    J(p)        = J_prior + p * Jd                        posterior information
    BCRLB(p)    = sqrt(Tr_p(J(p)^-1))                     position error bound [m]

State ordering is (x, xdot, y, ydot) throughout; ``Tr_p`` is the trace over
the two position diagonal entries (indices 0 and 2).

Because the range/azimuth measurement carries no velocity information, the
velocity rows and columns of ``Jd`` are identically zero.  Partitioning any
posterior ``J(p)`` into position/velocity blocks therefore gives

    Tr_p(J(p)^-1) = trace( (S + p * Xi)^-1 )

where ``S`` is the 2x2 Schur complement of the prior's velocity block
(the "position information" of the prior) and ``Xi`` is the 2x2 position
block of ``Jd``.  All hot paths run on that closed 2x2 form; the generic
4x4 inversion is kept as an independent cross-check route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, GeometryError, NumericalError

FOUR_PI_CUBED = (4.0 * math.pi) ** 3

# state-vector indices, ordering (x, xdot, y, ydot)
POSITION_IDX = (0, 2)
VELOCITY_IDX = (1, 3)


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadarSystemParams:
    """Radar system constants, SI units.

    Defaults are the simulation values used throughout the benchmarks.
    ``min_power`` is the per-target floor p_min; ``None`` means "resolve at
    scenario construction" (the scenario generator uses 0.05 * P / N).
    """

    total_power: float = 2.0e6        # P [W]
    gain: float = 1000.0              # G, transmit/receive antenna gain
    wavelength: float = 1.0           # lambda [m]
    antenna_size: float = 5.0         # D [m]
    bandwidth: float = 1.0e6          # B [Hz], transmit baseband
    noise_bandwidth: float = 1.1e6    # B_n [Hz], receiver noise bandwidth
    noise_temp: float = 290.0         # T_0 [K]
    noise_figure: float = 10.0 ** 0.2  # F, linear
    boltzmann: float = 1.38e-23       # k [J/K]
    light_speed: float = 3.0e8        # c [m/s]
    scan_period: float = 1.0          # T_s [s]
    min_power: float | None = None    # p_min [W]

    def __post_init__(self):
        positive = {
            "total_power": self.total_power,
            "gain": self.gain,
            "wavelength": self.wavelength,
            "antenna_size": self.antenna_size,
            "bandwidth": self.bandwidth,
            "noise_bandwidth": self.noise_bandwidth,
            "noise_temp": self.noise_temp,
            "noise_figure": self.noise_figure,
            "boltzmann": self.boltzmann,
            "light_speed": self.light_speed,
            "scan_period": self.scan_period,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
        if self.min_power is not None:
            if not (math.isfinite(self.min_power) and self.min_power >= 0.0):
                raise DomainError(f"min_power must be finite and >= 0, got {self.min_power!r}")

    def with_min_power(self, p_min: float) -> "RadarSystemParams":
        return replace(self, min_power=p_min)


@dataclass(frozen=True)
class TargetPhysics:
    """Per-target physical parameters: range R [m], azimuth theta [rad],
    radar cross section sigma [m^2], and tracking priority weight w."""

    range_m: float
    azimuth_rad: float
    rcs_m2: float
    weight: float

    def __post_init__(self):
        if not (math.isfinite(self.range_m) and self.range_m > 0.0):
            raise DomainError(f"range must be > 0, got {self.range_m!r}")
        if not (math.isfinite(self.rcs_m2) and self.rcs_m2 > 0.0):
            raise DomainError(f"rcs must be > 0, got {self.rcs_m2!r}")
        if not (math.isfinite(self.weight) and self.weight > 0.0):
            raise DomainError(f"weight must be > 0, got {self.weight!r}")
        if not math.isfinite(self.azimuth_rad):
            raise DomainError("azimuth must be finite")

    @property
    def x(self) -> float:
        return self.range_m * math.cos(self.azimuth_rad)

    @property
    def y(self) -> float:
        return self.range_m * math.sin(self.azimuth_rad)

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class MeasurementNoiseCoeffs:
    """Power-normalized measurement noise: sigma_r^2 = gamma_r / p [m^2],
    sigma_theta^2 = gamma_theta / p [rad^2]."""

    gamma_r: float       # [m^2 W]
    gamma_theta: float   # [rad^2 W]

    def __post_init__(self):
        if not (math.isfinite(self.gamma_r) and self.gamma_r > 0.0):
            raise DomainError(f"gamma_r must be > 0, got {self.gamma_r!r}")
        if not (math.isfinite(self.gamma_theta) and self.gamma_theta > 0.0):
            raise DomainError(f"gamma_theta must be > 0, got {self.gamma_theta!r}")


# ---------------------------------------------------------------------------
# radar equation and measurement model
# ---------------------------------------------------------------------------


def snr_per_watt(phys: TargetPhysics, sys: RadarSystemParams) -> float:
    """Received SNR per transmitted watt [1/W].

    SNR(p) = p * G^2 lambda^2 sigma / ((4 pi)^3 R^4 F k T0 Bn); this returns
    the bracket, so SNR at power p is ``p * snr_per_watt(...)``.
    """
    num = sys.gain**2 * sys.wavelength**2 * phys.rcs_m2
    den = (
        FOUR_PI_CUBED
        * phys.range_m**4
        * sys.noise_figure
        * sys.boltzmann
        * sys.noise_temp
        * sys.noise_bandwidth
    )
    out = num / den if den > 0.0 else math.inf
    if not (math.isfinite(out) and out > 0.0):
        raise DomainError(f"non-finite SNR per watt for R={phys.range_m}, rcs={phys.rcs_m2}")
    return out


def noise_coeffs(phys: TargetPhysics, sys: RadarSystemParams) -> MeasurementNoiseCoeffs:
    """Range/azimuth noise coefficients from waveform and beamwidth accuracy.

    Range accuracy scales with the waveform resolution c/(2B) and azimuth
    accuracy with the beamwidth lambda/D, both divided by the SNR:

        sigma_r^2     = c^2 / (8 B^2 SNR)
        sigma_theta^2 = lambda^2 / (2 D^2 SNR)

    With SNR = p * snr_per_watt this gives gamma_r and gamma_theta such that
    sigma^2 = gamma / p.
    """
    spw = snr_per_watt(phys, sys)
    gamma_r = sys.light_speed**2 / (8.0 * sys.bandwidth**2) / spw
    gamma_theta = sys.wavelength**2 / (2.0 * sys.antenna_size**2) / spw
    return MeasurementNoiseCoeffs(gamma_r=gamma_r, gamma_theta=gamma_theta)


def measurement_jacobian(x: float, y: float) -> np.ndarray:
    """2x4 Jacobian of the (range, azimuth) measurement at position (x, y).

    Rows are the partials of r = sqrt(x^2 + y^2) and theta = atan2(y, x)
    with respect to the state (x, xdot, y, ydot); velocity columns are zero.
    """
    r2 = x * x + y * y
    r = math.sqrt(r2)
    if r == 0.0:
        raise GeometryError("measurement Jacobian undefined at the radar origin (r = 0)")
    return np.array(
        [
            [x / r, 0.0, y / r, 0.0],
            [-y / r2, 0.0, x / r2, 0.0],
        ]
    )


def normalized_meas_info(phys: TargetPhysics, coeffs: MeasurementNoiseCoeffs) -> np.ndarray:
    """Measurement information matrix per watt, H^T diag(1/gamma) H.

    Only the position block is populated; with a = 1/(gamma_r r^2) and
    b = 1/(gamma_theta r^4) the nonzero entries are

        Xi_xx = a x^2 + b y^2
        Xi_yy = a y^2 + b x^2
        Xi_xy = (a - b) x y
    """
    x, y = phys.position
    r2 = x * x + y * y
    if r2 == 0.0:
        raise GeometryError("measurement information undefined at the radar origin")
    a = 1.0 / (coeffs.gamma_r * r2)
    b = 1.0 / (coeffs.gamma_theta * r2 * r2)
    out = np.zeros((4, 4))
    out[0, 0] = a * x * x + b * y * y
    out[2, 2] = a * y * y + b * x * x
    out[0, 2] = out[2, 0] = (a - b) * x * y
    return out


def prior_info(sigma_p: float, sigma_v: float) -> np.ndarray:
    """Diagonal prior information diag(sigma_p^-2, sigma_v^-2, ...) from the
    predicted position/velocity standard deviations [m], [m/s]."""
    if not (math.isfinite(sigma_p) and sigma_p > 0.0):
        raise DomainError(f"sigma_p must be > 0, got {sigma_p!r}")
    if not (math.isfinite(sigma_v) and sigma_v > 0.0):
        raise DomainError(f"sigma_v must be > 0, got {sigma_v!r}")
    return np.diag([sigma_p**-2, sigma_v**-2, sigma_p**-2, sigma_v**-2])


def posterior_info(j_prior: np.ndarray, j_d: np.ndarray, p: float) -> np.ndarray:
    """Posterior information J(p) = J_prior + p * Jd."""
    return j_prior + p * j_d


def trace_p(m: np.ndarray) -> float:
    """Trace over the position diagonal entries (state order x, xdot, y, ydot)."""
    return float(m[0, 0] + m[2, 2])


# ---------------------------------------------------------------------------
# 4x4 inversion: closed-form block route and generic fallback
# ---------------------------------------------------------------------------


def _inv2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0.0 or not math.isfinite(det):
        raise NumericalError("singular 2x2 block")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def position_information(j: np.ndarray) -> np.ndarray:
    """2x2 position information of a 4x4 information matrix.

    This is the Schur complement of the velocity block, A - B C^-1 B^T in
    the (position | velocity) partition; equivalently, the inverse of the
    position block of j^-1.
    """
    pos = list(POSITION_IDX)
    vel = list(VELOCITY_IDX)
    a = j[np.ix_(pos, pos)]
    b = j[np.ix_(pos, vel)]
    c = j[np.ix_(vel, vel)]
    return a - b @ _inv2(c) @ b.T


def invert_sym4(m: np.ndarray, generic: bool = False) -> np.ndarray:
    """Invert a symmetric 4x4 via closed-form block inversion.

    ``generic=True`` routes through numpy's LU solve instead; the two paths
    are cross-checked in the test suite.
    """
    if generic:
        try:
            return np.linalg.inv(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular 4x4 matrix: {exc}") from exc
    pos = list(POSITION_IDX)
    vel = list(VELOCITY_IDX)
    a = m[np.ix_(pos, pos)]
    b = m[np.ix_(pos, vel)]
    c = m[np.ix_(vel, vel)]
    c_inv = _inv2(c)
    s_inv = _inv2(a - b @ c_inv @ b.T)
    top_right = -s_inv @ b @ c_inv
    bottom = c_inv + c_inv @ b.T @ s_inv @ b @ c_inv
    out = np.empty((4, 4))
    out[np.ix_(pos, pos)] = s_inv
    out[np.ix_(pos, vel)] = top_right
    out[np.ix_(vel, pos)] = top_right.T
    out[np.ix_(vel, vel)] = bottom
    return out


# ---------------------------------------------------------------------------
# BCRLB and the allocation objective
# ---------------------------------------------------------------------------


def _trace_p_inv_2x2(s: np.ndarray, xi: np.ndarray, p: float) -> float:
    m = s + p * xi
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    tr = m[0, 0] + m[1, 1]
    if det <= 0.0 or tr <= 0.0 or not math.isfinite(det):
        raise NumericalError("posterior information is not positive definite")
    return tr / det


def bcrlb(j_prior: np.ndarray, j_d: np.ndarray, p: float, w: float = 1.0) -> float:
    """Weighted position-error lower bound w * sqrt(Tr_p(J(p)^-1)) [m].

    ``j_d`` must carry position information only (zero velocity rows/cols),
    so the bound reduces to the 2x2 form sqrt(trace((S + p Xi)^-1)).
    """
    if p < 0.0:
        raise DomainError(f"power must be >= 0, got {p!r}")
    s = position_information(j_prior)
    xi = j_d[np.ix_(list(POSITION_IDX), list(POSITION_IDX))]
    return w * math.sqrt(_trace_p_inv_2x2(s, xi, p))


@dataclass(frozen=True)
class TargetSet:
    """Stacked per-target quantities for vectorized bound/gradient evaluation.

    ``s11, s12, s22`` are the entries of each prior's 2x2 position
    information (Schur complement of the velocity block); ``xi11, xi13,
    xi33`` the entries of each target's per-watt measurement information
    position block; ``prior_trace_p`` is Tr_p of the prior information
    matrix itself (used by the information-ratio feature).
    """

    weights: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s22: np.ndarray
    xi11: np.ndarray
    xi13: np.ndarray
    xi33: np.ndarray
    prior_trace_p: np.ndarray

    @classmethod
    def from_matrices(cls, j_priors, j_ds, weights) -> "TargetSet":
        jp = np.asarray(j_priors, dtype=float)
        jd = np.asarray(j_ds, dtype=float)
        w = np.asarray(weights, dtype=float)
        pos = list(POSITION_IDX)
        vel = list(VELOCITY_IDX)
        a = jp[np.ix_(range(len(w)), pos, pos)]
        b = jp[np.ix_(range(len(w)), pos, vel)]
        c = jp[np.ix_(range(len(w)), vel, vel)]
        det_c = c[:, 0, 0] * c[:, 1, 1] - c[:, 0, 1] * c[:, 1, 0]
        if np.any(det_c <= 0.0) or not np.all(np.isfinite(det_c)):
            raise NumericalError("prior velocity block is not positive definite")
        c_inv = np.empty_like(c)
        c_inv[:, 0, 0] = c[:, 1, 1]
        c_inv[:, 1, 1] = c[:, 0, 0]
        c_inv[:, 0, 1] = -c[:, 0, 1]
        c_inv[:, 1, 0] = -c[:, 1, 0]
        c_inv /= det_c[:, None, None]
        s = a - np.einsum("nij,njk,nlk->nil", b, c_inv, b)
        return cls(
            weights=w,
            s11=s[:, 0, 0].copy(),
            s12=s[:, 0, 1].copy(),
            s22=s[:, 1, 1].copy(),
            xi11=jd[:, 0, 0].copy(),
            xi13=jd[:, 0, 2].copy(),
            xi33=jd[:, 2, 2].copy(),
            prior_trace_p=(jp[:, 0, 0] + jp[:, 2, 2]).copy(),
        )

    @property
    def n(self) -> int:
        return self.weights.size

    def trace_p_inv(self, p) -> np.ndarray:
        """Tr_p(J(p)^-1) per target [m^2]; ``p`` is a scalar or length-N array."""
        a = self.s11 + p * self.xi11
        b = self.s12 + p * self.xi13
        c = self.s22 + p * self.xi33
        det = a * c - b * b
        return (a + c) / det

    def trace_p_inv_deriv(self, p) -> np.ndarray:
        """d/dp of Tr_p(J(p)^-1) per target (negative)."""
        a = self.s11 + p * self.xi11
        b = self.s12 + p * self.xi13
        c = self.s22 + p * self.xi33
        det = a * c - b * b
        ddet = self.xi11 * c + a * self.xi33 - 2.0 * b * self.xi13
        tr = a + c
        dtr = self.xi11 + self.xi33
        return (dtr * det - tr * ddet) / (det * det)

    def bcrlb(self, p) -> np.ndarray:
        """Weighted per-target bound w * sqrt(Tr_p(J(p)^-1)) [m]."""
        return self.weights * np.sqrt(self.trace_p_inv(p))

    def marginal_benefit(self, p) -> np.ndarray:
        """Bound reduction rate per extra watt, -d(w * BCRLB)/dp > 0 [m/W]."""
        t = self.trace_p_inv(p)
        return -self.weights * self.trace_p_inv_deriv(p) / (2.0 * np.sqrt(t))

    def curvature(self, p) -> np.ndarray:
        """Second derivative of the weighted bound, d^2(w * BCRLB)/dp^2 > 0.

        Closed form from the quadratic determinant of the position block;
        strictly positive (the bound is strictly convex in power).
        """
        a = self.s11 + p * self.xi11
        b = self.s12 + p * self.xi13
        c = self.s22 + p * self.xi33
        det = a * c - b * b
        tr = a + c
        dtr = self.xi11 + self.xi33
        ddet = self.xi11 * c + a * self.xi33 - 2.0 * b * self.xi13
        d2det = 2.0 * (self.xi11 * self.xi33 - self.xi13 * self.xi13)
        t = tr / det
        dt = (dtr * det - tr * ddet) / (det * det)
        d2t = (-tr * d2det * det - 2.0 * ddet * (dtr * det - tr * ddet)) / det**3
        return self.weights * (2.0 * t * d2t - dt * dt) / (4.0 * t**1.5)


def _as_target_set(targets) -> TargetSet:
    if isinstance(targets, TargetSet):
        return targets
    ts = getattr(targets, "target_set", None)
    if ts is None:
        raise TypeError(f"expected a TargetSet or an object with .target_set, got {type(targets)!r}")
    return ts


def objective(targets, p) -> float:
    """Total weighted bound F(p) = sum_i w_i * BCRLB_i(p_i) [m]."""
    ts = _as_target_set(targets)
    p = np.asarray(p, dtype=float)
    if p.shape != (ts.n,):
        raise DomainError(f"allocation length {p.shape} does not match {ts.n} targets")
    return float(np.sum(ts.bcrlb(p)))


def objective_gradient(targets, p) -> np.ndarray:
    """Per-target partials dF/dp_i (all negative in the feasible interior).

    The negated gradient evaluated at the equal share P/N is the baseline
    marginal benefit; evaluated at p_min it is the cliff marginal benefit.
    """
    ts = _as_target_set(targets)
    p = np.asarray(p, dtype=float)
    if p.shape != (ts.n,):
        raise DomainError(f"allocation length {p.shape} does not match {ts.n} targets")
    return -ts.marginal_benefit(p)
