#!/usr/bin/env python3
"""
geometry.py

Finite-set metric geometry: point sets, scale grids, closed balls, covering
numbers and the Hausdorff distance. All estimators in the package are built on
these primitives.

Covering numbers count sets of diameter at most r. In one dimension the count
is exact (left-to-right sweep); in higher dimensions it is the size of a greedy
farthest-point net of radius r/2, which differs from the minimum by a bounded
factor and leaves log-log slopes unchanged.

Status: Development
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np
from scipy.spatial.distance import cdist, directed_hausdorff

from fractals.config import DEFAULT_RATIO_FLOOR, DISTANCE_TOL
from fractals.errors import InvalidInputError


class _EmptyBall:
    """Marker returned by ball_restrict when no point lies in the ball."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __len__(self):
        return 0

    def __repr__(self):
        return "EMPTY_BALL"


EMPTY_BALL = _EmptyBall()


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PointSet:
    """A nonempty finite set of points in R^m, stored as an (n, m) array."""

    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] == 0:
            raise InvalidInputError(f"point set must be a nonempty (n, m) array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("point set contains NaN or infinite coordinates")
        object.__setattr__(self, "points", _frozen(points))

    @classmethod
    def from_points(cls, points, dim=None):
        array = np.asarray(points, dtype=float)
        if dim is not None:
            array = array.reshape(-1, dim)
        return cls(array)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self) -> Iterator[Tuple[float, ...]]:
        return (tuple(row) for row in self.points)

    def sorted(self) -> "PointSet":
        """Same set with rows in lexicographic order."""
        order = np.lexsort(self.points.T[::-1])
        return PointSet(self.points[order])

    def as_set(self, decimals=12):
        return {tuple(row) for row in np.round(self.points, decimals)}


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric progression of scales from r_min to r_max and the admissible (r, R) pairs."""

    r_min: float
    r_max: float
    levels: int = 8
    ratio_floor: float = DEFAULT_RATIO_FLOOR
    min_atoms: int = 1

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise InvalidInputError(f"scale grid needs 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.levels < 2:
            raise InvalidInputError("scale grid needs at least 2 levels")
        if self.ratio_floor <= 1:
            raise InvalidInputError("ratio floor must exceed 1")

    def scales(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.levels)

    def pairs(self, r_cap=None):
        """Admissible (r, R) pairs with R / r >= ratio_floor and, if given, R <= r_cap."""
        scales = self.scales()
        result = []
        for j, big in enumerate(scales):
            if r_cap is not None and big > r_cap + DISTANCE_TOL:
                continue
            for small in scales[:j]:
                if big / small >= self.ratio_floor * (1 - 1e-9):
                    result.append((float(small), float(big)))
        return result

    def scaled(self, factor) -> "ScaleGrid":
        return ScaleGrid(self.r_min * factor, self.r_max * factor, self.levels, self.ratio_floor, self.min_atoms)

    def to_dict(self):
        return {
            "r_min": self.r_min,
            "r_max": self.r_max,
            "levels": self.levels,
            "ratio_floor": self.ratio_floor,
            "min_atoms": self.min_atoms,
        }


def _check_same_dim(a_dim, b_dim):
    if a_dim != b_dim:
        raise InvalidInputError(f"dimension mismatch: {a_dim} vs {b_dim}")


def diameter(E: PointSet) -> float:
    """Largest pairwise Euclidean distance."""
    pts = E.points
    if E.dim == 1:
        return float(pts.max() - pts.min())
    best = 0.0
    # chunked to keep memory bounded on large sets
    for start in range(0, len(pts), 1024):
        block = cdist(pts[start:start + 1024], pts)
        best = max(best, float(block.max()))
    return best


def hausdorff_distance(A: PointSet, B: PointSet) -> float:
    """Exact Hausdorff distance between two finite sets."""
    _check_same_dim(A.dim, B.dim)
    forward = directed_hausdorff(A.points, B.points, seed=0)[0]
    backward = directed_hausdorff(B.points, A.points, seed=0)[0]
    return float(max(forward, backward))


def ball_restrict(E: PointSet, x, R: float):
    """Points of E in the closed ball B_R(x), or EMPTY_BALL."""
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_same_dim(E.dim, x.shape[0])
    dist = np.linalg.norm(E.points - x, axis=1)
    mask = dist <= R + DISTANCE_TOL
    if not mask.any():
        return EMPTY_BALL
    return PointSet(E.points[mask])


def greedy_net(points: np.ndarray, radius: float, strict=False) -> np.ndarray:
    """
    Indices of a greedy farthest-point net.

    The first net point is the lexicographically smallest row; afterwards the point
    farthest from the current net is added until every point lies within `radius`
    (or strictly closer than `radius` when strict=True).
    """
    points = np.asarray(points, dtype=float)
    first = int(np.lexsort(points.T[::-1])[0])
    chosen = [first]
    nearest = np.linalg.norm(points - points[first], axis=1)
    while True:
        far = int(np.argmax(nearest))
        gap = nearest[far]
        uncovered = gap >= radius if strict else gap > radius + DISTANCE_TOL
        if not uncovered:
            break
        chosen.append(far)
        nearest = np.minimum(nearest, np.linalg.norm(points - points[far], axis=1))
    return np.array(chosen, dtype=int)


def _sweep_count(sorted_values: np.ndarray, r: float) -> int:
    """Minimal number of intervals of length r covering sorted 1D values."""
    count = 0
    idx = 0
    size = len(sorted_values)
    while idx < size:
        idx = int(np.searchsorted(sorted_values, sorted_values[idx] + r + DISTANCE_TOL, side="right"))
        count += 1
    return count


def covering_number(E: PointSet, r: float) -> int:
    """Number of sets of diameter at most r needed to cover E."""
    if r <= 0:
        raise InvalidInputError(f"covering scale must be positive, got {r}")
    if E.dim == 1:
        return _sweep_count(np.sort(E.points[:, 0]), r)
    return len(greedy_net(E.points, r / 2))
