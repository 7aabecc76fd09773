"""
config.py

Numeric constants and the run configuration shared by the library and the
command line.
"""

from dataclasses import dataclass
from typing import Optional

DEFAULT_SEED = 0xF12AC7

# Absolute tolerances
DISTANCE_TOL = 1e-12
MERGE_TOL = 1e-12
PROBABILITY_TOL = 1e-12
ORTHOGONAL_TOL = 1e-10
HULL_TOL = 1e-9
DIMENSION_TOL = 1e-12

# Caps
DEPTH_CAP = 2 ** 20
CONVOLUTION_CAP = 2 ** 22
TRANSPORT_CAP = 512
EXACT_DP_CAP = 512
EXACT_GENERAL_ORDER_CAP = 128
HULL_MAX_ITER = 10 ** 5
CONSTRUCTION_MAX_DEPTH = 40

# Estimators
DEFAULT_RATIO_FLOOR = 8.0
DEFAULT_CENTER_CAP = 512
DEFAULT_LLOYD_RESTARTS = 16
LLOYD_MAX_ITER = 300
DEFAULT_TRIALS = 200


@dataclass
class RunConfig:
    """Global options of one command line invocation."""

    seed: int = DEFAULT_SEED
    depth: int = 10
    trials: int = DEFAULT_TRIALS
    out: Optional[str] = None
    fmt: str = "json"
    log_level: str = "WARNING"
