"""Random scenario generation, validation, and JSON (de)serialization.

Scenarios are the unit of every experiment: N targets with per-target
physics and priors, plus the radar system constants.  Target parameters are
drawn from fixed distributions (ranges uniform in 10-150 km, azimuth in
10-170 deg, RCS in 0.5-10 m^2, weights in 1-10, prior position/velocity
standard deviations log-uniform over 10-10^4 m and 1-100 m/s).

Reproducibility contract: generation is a pure function of
(seed, N, sys, label).  Each target draws from its own counter-based
Philox stream keyed by (seed, target index), so per-target draws are
order-independent and parallel generation stays deterministic.  Train and
eval batches derive per-instance seeds by hashing (base_seed, label, index),
which keeps the two seed streams disjoint.

Serialized files carry a schema version and a SHA-256 checksum; information
matrices are never serialized (they are recomputed on load so the physics
stays single-sourced).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import radar_model
from .errors import (
    DomainError,
    InfeasibleScenarioError,
    IntegrityError,
    SchemaError,
)
from .radar_model import RadarSystemParams, TargetPhysics, TargetSet

SCHEMA_VERSION = "1"

# distribution supports for the random draws
RANGE_KM = (10.0, 150.0)
AZIMUTH_DEG = (10.0, 170.0)
RCS_M2 = (0.5, 10.0)
WEIGHT = (1.0, 10.0)
LOG10_SIGMA_P = (1.0, 4.0)   # sigma_p in 10..10^4 m
LOG10_SIGMA_V = (0.0, 2.0)   # sigma_v in 1..100 m/s
SPEED_MPS = (50.0, 300.0)
HEADING_RAD = (0.0, 2.0 * math.pi)

DEFAULT_MIN_POWER_FRACTION = 0.05  # p_min = fraction * P / N unless overridden

_META_STREAM_KEY = 2**63 - 1  # per-instance stream distinct from target indices

VALID_LABELS = ("train", "eval")


@dataclass(frozen=True)
class Target:
    """One tracked target: physics, prior spread, motion, and the two
    information matrices derived from them."""

    phys: TargetPhysics
    sigma_p: float           # prior position std dev [m]
    sigma_v: float           # prior velocity std dev [m/s]
    speed_mps: float         # initial speed for the tracking loop [m/s]
    heading_rad: float       # initial heading [rad]
    j_prior: np.ndarray = field(repr=False)
    j_d: np.ndarray = field(repr=False)


def make_target(
    phys: TargetPhysics,
    sigma_p: float,
    sigma_v: float,
    sys: RadarSystemParams,
    speed_mps: float = 0.0,
    heading_rad: float = 0.0,
) -> Target:
    """Build a Target, computing its prior and measurement information."""
    j_prior = radar_model.prior_info(sigma_p, sigma_v)
    j_d = radar_model.normalized_meas_info(phys, radar_model.noise_coeffs(phys, sys))
    return Target(
        phys=phys,
        sigma_p=sigma_p,
        sigma_v=sigma_v,
        speed_mps=speed_mps,
        heading_rad=heading_rad,
        j_prior=j_prior,
        j_d=j_d,
    )


@dataclass(frozen=True)
class ScenarioInstance:
    """N targets plus the radar system constants; the unit of all experiments."""

    sys: RadarSystemParams
    targets: list[Target]
    seed: int
    label: str = "eval"

    def __post_init__(self):
        self.validate()

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def min_power(self) -> float:
        return self.sys.min_power

    @cached_property
    def target_set(self) -> TargetSet:
        """Stacked per-target arrays for vectorized bound evaluation."""
        return TargetSet.from_matrices(
            j_priors=np.stack([t.j_prior for t in self.targets]),
            j_ds=np.stack([t.j_d for t in self.targets]),
            weights=np.array([t.phys.weight for t in self.targets]),
        )

    def validate(self) -> None:
        if self.n < 1:
            raise DomainError("scenario must contain at least one target")
        if self.label not in VALID_LABELS:
            raise SchemaError(f"label must be one of {VALID_LABELS}, got {self.label!r}")
        if self.sys.min_power is None:
            raise DomainError("scenario requires a resolved min_power")
        if self.n * self.sys.min_power > self.sys.total_power * (1.0 + 1e-12):
            raise InfeasibleScenarioError(
                f"N * p_min = {self.n * self.sys.min_power:.6g} W exceeds "
                f"P = {self.sys.total_power:.6g} W"
            )
        for i, t in enumerate(self.targets):
            _check_info_matrices(i, t)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "seed": self.seed,
            "label": self.label,
            "sys": _sys_to_dict(self.sys),
            "targets": [
                {
                    "R_m": t.phys.range_m,
                    "theta_rad": t.phys.azimuth_rad,
                    "rcs_m2": t.phys.rcs_m2,
                    "w": t.phys.weight,
                    "sigma_p_m": t.sigma_p,
                    "sigma_v_mps": t.sigma_v,
                    "speed_mps": t.speed_mps,
                    "heading_rad": t.heading_rad,
                }
                for t in self.targets
            ],
        }

    def to_json(self) -> str:
        payload = self.to_dict()
        payload["checksum"] = _checksum(payload)
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, payload: dict) -> "ScenarioInstance":
        version = payload.get("version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}")
        try:
            sys = _sys_from_dict(payload["sys"])
            targets = [
                make_target(
                    phys=TargetPhysics(
                        range_m=t["R_m"],
                        azimuth_rad=t["theta_rad"],
                        rcs_m2=t["rcs_m2"],
                        weight=t["w"],
                    ),
                    sigma_p=t["sigma_p_m"],
                    sigma_v=t["sigma_v_mps"],
                    sys=sys,
                    speed_mps=t["speed_mps"],
                    heading_rad=t["heading_rad"],
                )
                for t in payload["targets"]
            ]
            return cls(sys=sys, targets=targets, seed=payload["seed"], label=payload["label"])
        except KeyError as exc:
            raise SchemaError(f"missing field {exc} in scenario payload") from exc

    @classmethod
    def from_json(cls, text: str) -> "ScenarioInstance":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed scenario JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise SchemaError("scenario JSON must be an object")
        stored = payload.pop("checksum", None)
        if stored is None:
            raise SchemaError("scenario JSON is missing its checksum")
        actual = _checksum(payload)
        if stored != actual:
            raise IntegrityError(f"checksum mismatch: stored {stored[:12]}.., computed {actual[:12]}..")
        return cls.from_dict(payload)


@dataclass(frozen=True)
class ScenarioBatch:
    """A list of instances drawn with target counts inside ``n_range``."""

    instances: list[ScenarioInstance]
    n_range: tuple[int, int]

    def __post_init__(self):
        lo, hi = self.n_range
        for inst in self.instances:
            if not lo <= inst.n <= hi:
                raise DomainError(f"instance with N={inst.n} outside n_range [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def _target_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def derive_seed(base_seed: int, label: str, index: int) -> int:
    """Hash-derived 63-bit instance seed; distinct labels give disjoint streams."""
    digest = hashlib.sha256(f"{base_seed}|{label}|{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def generate(
    seed: int,
    n: int,
    sys: RadarSystemParams | None = None,
    label: str = "eval",
) -> ScenarioInstance:
    """Draw an N-target scenario from the standard distributions.

    If ``sys.min_power`` is unset it resolves to 0.05 * P / N.  Raises
    InfeasibleScenarioError when N * p_min > P.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    sys = sys if sys is not None else RadarSystemParams()
    if sys.min_power is None:
        sys = sys.with_min_power(DEFAULT_MIN_POWER_FRACTION * sys.total_power / n)
    targets = []
    for i in range(n):
        rng = _target_rng(seed, i)
        range_m = rng.uniform(*RANGE_KM) * 1e3
        azimuth = math.radians(rng.uniform(*AZIMUTH_DEG))
        rcs = rng.uniform(*RCS_M2)
        weight = rng.uniform(*WEIGHT)
        sigma_p = 10.0 ** rng.uniform(*LOG10_SIGMA_P)
        sigma_v = 10.0 ** rng.uniform(*LOG10_SIGMA_V)
        speed = rng.uniform(*SPEED_MPS)
        heading = rng.uniform(*HEADING_RAD)
        targets.append(
            make_target(
                phys=TargetPhysics(range_m=range_m, azimuth_rad=azimuth, rcs_m2=rcs, weight=weight),
                sigma_p=sigma_p,
                sigma_v=sigma_v,
                sys=sys,
                speed_mps=speed,
                heading_rad=heading,
            )
        )
    return ScenarioInstance(sys=sys, targets=targets, seed=seed, label=label)


def generate_batch(
    base_seed: int,
    count: int,
    n_range: tuple[int, int],
    sys: RadarSystemParams | None = None,
    label: str = "train",
) -> ScenarioBatch:
    """Generate ``count`` independent instances with N uniform in ``n_range``."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    lo, hi = int(n_range[0]), int(n_range[1])
    if not 1 <= lo <= hi:
        raise DomainError(f"invalid n_range {n_range!r}")
    if label not in VALID_LABELS:
        raise SchemaError(f"label must be one of {VALID_LABELS}, got {label!r}")
    instances = []
    for i in range(count):
        inst_seed = derive_seed(base_seed, label, i)
        meta_rng = _target_rng(inst_seed, _META_STREAM_KEY)
        n = int(meta_rng.integers(lo, hi + 1))
        instances.append(generate(inst_seed, n, sys=sys, label=label))
    return ScenarioBatch(instances=instances, n_range=(lo, hi))


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------


def save(instance: ScenarioInstance, path) -> None:
    Path(path).write_text(instance.to_json(), encoding="utf-8")


def load(path) -> ScenarioInstance:
    return ScenarioInstance.from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _sys_to_dict(sys: RadarSystemParams) -> dict:
    return {
        "total_power_w": sys.total_power,
        "min_power_w": sys.min_power,
        "gain": sys.gain,
        "wavelength_m": sys.wavelength,
        "antenna_size_m": sys.antenna_size,
        "bandwidth_hz": sys.bandwidth,
        "noise_bandwidth_hz": sys.noise_bandwidth,
        "noise_temp_k": sys.noise_temp,
        "noise_figure": sys.noise_figure,
        "boltzmann_j_per_k": sys.boltzmann,
        "light_speed_mps": sys.light_speed,
        "scan_period_s": sys.scan_period,
    }


def _sys_from_dict(d: dict) -> RadarSystemParams:
    return RadarSystemParams(
        total_power=d["total_power_w"],
        min_power=d["min_power_w"],
        gain=d["gain"],
        wavelength=d["wavelength_m"],
        antenna_size=d["antenna_size_m"],
        bandwidth=d["bandwidth_hz"],
        noise_bandwidth=d["noise_bandwidth_hz"],
        noise_temp=d["noise_temp_k"],
        noise_figure=d["noise_figure"],
        boltzmann=d["boltzmann_j_per_k"],
        light_speed=d["light_speed_mps"],
        scan_period=d["scan_period_s"],
    )


def _check_info_matrices(index: int, t: Target) -> None:
    jp, jd = t.j_prior, t.j_d
    for name, m in (("j_prior", jp), ("j_d", jd)):
        if m.shape != (4, 4):
            raise DomainError(f"target {index}: {name} must be 4x4")
        scale = np.max(np.abs(m)) or 1.0
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise DomainError(f"target {index}: {name} is not symmetric")
    vel = list(radar_model.VELOCITY_IDX)
    if np.any(jd[vel, :] != 0.0) or np.any(jd[:, vel] != 0.0):
        raise DomainError(f"target {index}: j_d velocity rows/columns must be zero")
    pos = list(radar_model.POSITION_IDX)
    pos_block = jd[np.ix_(pos, pos)]
    eigvals = np.linalg.eigvalsh(pos_block)
    if eigvals.min() < -1e-12 * max(np.linalg.norm(pos_block), 1e-300):
        raise DomainError(f"target {index}: j_d position block is not PSD")
    if np.linalg.eigvalsh(jp).min() <= 0.0:
        raise DomainError(f"target {index}: j_prior is not positive definite")
