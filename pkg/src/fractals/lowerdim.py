#!/usr/bin/env python3
"""
lowerdim.py

Finite-scale estimators of the lower (Assouad) dimension.

The definition asks for the largest beta with N_r(B_R(x) & E) >= M (R/r)^beta for
all centers and scales. On finite data the constant M cannot be identified, so
the estimators report the minimum local exponent over admissible scale pairs
with R / r >= ratio_floor. Larger floors tighten the estimate.

Status: Development
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from fractals.config import DEFAULT_CENTER_CAP, DISTANCE_TOL
from fractals.errors import InsufficientDataError
from fractals.geometry import PointSet, ScaleGrid, _sweep_count, ball_restrict, covering_number, diameter
from fractals.measure import DiscreteMeasure


class Witness(NamedTuple):
    center: Tuple[float, ...]
    r: float
    R: float
    exponent: float


@dataclass(frozen=True)
class DimensionEstimate:
    """
    A dimension estimate together with the evidence it was computed from.

    Lower-dimension estimates carry their witnesses and grid; quantization
    estimates carry the raw sequence r log n / (-log V) and its min/max proxies.
    """

    value: float
    method: str
    witnesses: Tuple[Witness, ...] = ()
    grid: Optional[ScaleGrid] = None
    raw: Tuple[Tuple[int, float], ...] = ()
    lower_proxy: Optional[float] = None
    upper_proxy: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    def argmin(self) -> Optional[Witness]:
        if not self.witnesses:
            return None
        return min(self.witnesses, key=lambda w: w.exponent)

    def to_dict(self):
        data = {"value": self.value, "method": self.method, "diagnostics": dict(self.diagnostics)}
        if self.grid is not None:
            data["grid"] = self.grid.to_dict()
            best = self.argmin()
            data["witness"] = None if best is None else {
                "center": list(best.center), "r": best.r, "R": best.R, "exponent": best.exponent,
            }
            data["witness_count"] = len(self.witnesses)
        if self.raw:
            data["raw"] = [[n, v] for n, v in self.raw]
            data["lower_proxy"] = self.lower_proxy
            data["upper_proxy"] = self.upper_proxy
        return data

    def witness_records(self):
        """Rows [cx1, ..., cxm, r, R, exponent] for CSV dumps."""
        return [list(w.center) + [w.r, w.R, w.exponent] for w in self.witnesses]


def select_centers(points: np.ndarray, cap: int = DEFAULT_CENTER_CAP) -> np.ndarray:
    """All rows, or a deterministic stride through the lexicographically sorted rows."""
    order = np.lexsort(points.T[::-1])
    points = points[order]
    if len(points) <= cap:
        return points
    stride = math.ceil(len(points) / cap)
    logging.debug(f"subsampling {len(points)} centers with stride {stride}")
    return points[::stride][:cap]


def _admissible_pairs(grid: ScaleGrid, diam: float):
    if grid.r_max > diam + DISTANCE_TOL:
        logging.warning(f"grid r_max {grid.r_max:.6g} exceeds the support diameter {diam:.6g}; large scales clipped")
    pairs = grid.pairs(r_cap=diam)
    if not pairs:
        raise InsufficientDataError(
            f"no scale pair with R/r >= {grid.ratio_floor} and R <= diameter {diam:.6g} in the grid"
        )
    return pairs


def _local_counts_1d(values: np.ndarray, centers: np.ndarray, pairs):
    """Covering counts of balls in R, using one sorted array and binary searches."""
    values = np.sort(values)
    for x in centers[:, 0]:
        for r, R in pairs:
            lo = np.searchsorted(values, x - R - DISTANCE_TOL, side="left")
            hi = np.searchsorted(values, x + R + DISTANCE_TOL, side="right")
            yield (x,), r, R, _sweep_count(values[lo:hi], r)


def estimate_lower_dim_set(E: PointSet, grid: ScaleGrid, center_cap: int = DEFAULT_CENTER_CAP) -> DimensionEstimate:
    """Minimum over centers and admissible pairs of log N_r(B_R(x) & E) / log(R/r)."""
    pairs = _admissible_pairs(grid, diameter(E))
    centers = select_centers(E.points, center_cap)
    if E.dim == 1:
        counts = _local_counts_1d(E.points[:, 0], centers, pairs)
    else:
        counts = (
            (tuple(x), r, R, covering_number(ball_restrict(E, x, R), r))
            for x in centers
            for r, R in pairs
        )
    witnesses = tuple(
        Witness(tuple(float(c) for c in center), r, R, math.log(count) / math.log(R / r))
        for center, r, R, count in counts
    )
    value = min(w.exponent for w in witnesses)
    logging.debug(f"lower set estimate {value:.6f} from {len(witnesses)} witnesses")
    return DimensionEstimate(
        value=value,
        method="covering-min",
        witnesses=witnesses,
        grid=grid,
        diagnostics={"centers": len(centers), "pairs": len(pairs)},
    )


def estimate_lower_dim_measure(
    mu: DiscreteMeasure, grid: ScaleGrid, center_cap: int = DEFAULT_CENTER_CAP
) -> DimensionEstimate:
    """Minimum over support centers and admissible pairs of log(mu(B_R(x)) / mu(B_r(x))) / log(R/r)."""
    mu.require_normalized("lower dimension of a measure")
    pairs = _admissible_pairs(grid, diameter(mu.support))
    centers = select_centers(mu.points, center_cap)
    radii = sorted({s for pair in pairs for s in pair})
    column = {rad: j for j, rad in enumerate(radii)}
    masses = np.empty((len(centers), len(radii)))
    atoms = np.empty((len(centers), len(radii)), dtype=int)
    for start in range(0, len(centers), 256):
        dist = cdist(centers[start:start + 256], mu.points)
        for j, rad in enumerate(radii):
            inside = dist <= rad + DISTANCE_TOL
            masses[start:start + 256, j] = inside @ mu.weights
            atoms[start:start + 256, j] = inside.sum(axis=1)
    witnesses = []
    skipped = 0
    for i, x in enumerate(centers):
        center = tuple(float(c) for c in x)
        for r, R in pairs:
            if atoms[i, column[r]] < grid.min_atoms:
                skipped += 1
                continue
            # the large ball contains the small one; rounding must not push the ratio below 1
            ratio = max(masses[i, column[R]] / masses[i, column[r]], 1.0)
            witnesses.append(Witness(center, r, R, math.log(ratio) / math.log(R / r)))
    if not witnesses:
        raise InsufficientDataError(f"every scale pair has fewer than {grid.min_atoms} atoms in the small ball")
    value = min(w.exponent for w in witnesses)
    logging.debug(f"lower measure estimate {value:.6f} from {len(witnesses)} witnesses ({skipped} skipped)")
    return DimensionEstimate(
        value=value,
        method="mass-ratio-min",
        witnesses=tuple(witnesses),
        grid=grid,
        diagnostics={"centers": len(centers), "pairs": len(pairs), "skipped": skipped},
    )
