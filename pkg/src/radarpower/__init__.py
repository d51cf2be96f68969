"""Closed-form radar transmit-power allocation for multi-target tracking.

Subpackages and modules:

- ``radar_model``: SNR, measurement information, BCRLB, allocation objective.
- ``scenario``: seeded random scenario generation and JSON (de)serialization.
- ``features``: the 20-dimensional per-target feature matrix.
- ``allocator``: closed-form scorers, baselines, and the feasibility transform.
- ``solvers``: dual-bisection and projected-gradient reference optimizers.
- ``expr``: expression language, evaluator, and cascaded fitness scoring.
- ``tracking``: closed-loop EKF simulation with per-step allocation.
- ``benchmarks``: the experiment drivers behind the CLI.
"""

__version__ = "0.1.0"

from .radar_model import RadarSystemParams, TargetPhysics  # noqa: F401
from .scenario import ScenarioInstance, generate, generate_batch  # noqa: F401
