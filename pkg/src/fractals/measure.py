#!/usr/bin/env python3
"""
measure.py

Finitely supported measures on R^m and the operations the dimension lemmas are
stated for: convolution, translation, scaling, mixtures and the Kantorovich
distance d_L (Wasserstein-1 for compactly supported probability measures).

Translation follows the convention (mu + x)(E) = mu(E + x), which moves mass
from a point y to y - x; translate(mu, x) therefore equals convolve(mu, delta_{-x}).

Status: Development
"""

import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np
import ot
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance

from fractals.config import CONVOLUTION_CAP, MERGE_TOL, PROBABILITY_TOL, TRANSPORT_CAP
from fractals.errors import InvalidInputError, ResourceLimitError
from fractals.geometry import PointSet
from utils.transformations import scale_coords


def _merge_duplicates(points: np.ndarray, weights: np.ndarray):
    """Sort rows lexicographically and add the weights of rows equal up to MERGE_TOL."""
    order = np.lexsort(points.T[::-1])
    points = points[order]
    weights = weights[order]
    if len(points) == 1:
        return points, weights
    same = np.all(np.abs(np.diff(points, axis=0)) <= MERGE_TOL, axis=1)
    starts = np.concatenate([[0], np.flatnonzero(~same) + 1])
    return points[starts], np.add.reduceat(weights, starts)


class DiscreteMeasure:
    """
    Positive weights on finitely many distinct points.

    `normalized` is inferred from the total mass unless given; passing
    normalized=True for weights that do not sum to 1 is an error.
    """

    def __init__(self, support, weights, normalized: Optional[bool] = None):
        points = support.points if isinstance(support, PointSet) else np.asarray(support, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if points.ndim != 2 or len(points) != len(weights) or len(weights) == 0:
            raise InvalidInputError(
                f"measure needs one positive weight per support point, got {points.shape} points and {weights.shape} weights"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise InvalidInputError("measure weights must be finite and strictly positive")
        points, weights = _merge_duplicates(points, weights)
        mass = math.fsum(weights)
        sums_to_one = abs(mass - 1.0) <= PROBABILITY_TOL
        if normalized is None:
            normalized = sums_to_one
        elif normalized and not sums_to_one:
            raise InvalidInputError(f"weights of a probability measure must sum to 1, got {mass!r}")
        weights.setflags(write=False)
        self._support = PointSet(points)
        self._weights = weights
        self._normalized = bool(normalized)

    @classmethod
    def dirac(cls, x) -> "DiscreteMeasure":
        return cls(np.atleast_2d(np.asarray(x, dtype=float)), [1.0])

    @property
    def support(self) -> PointSet:
        return self._support

    @property
    def points(self) -> np.ndarray:
        return self._support.points

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def normalized(self) -> bool:
        return self._normalized

    @property
    def dim(self) -> int:
        return self._support.dim

    @property
    def total_mass(self) -> float:
        return math.fsum(self._weights)

    def __len__(self):
        return len(self._weights)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, atoms={len(self)}, mass={self.total_mass:.12g})"

    def is_close(self, other: "DiscreteMeasure", tol=1e-12) -> bool:
        """Same atoms (up to tol) carrying the same weights (up to tol)."""
        if self.dim != other.dim or len(self) != len(other):
            return False
        return bool(np.allclose(self.points, other.points, atol=tol, rtol=0)
                    and np.allclose(self.weights, other.weights, atol=tol, rtol=0))

    def require_normalized(self, operation: str):
        if not self.normalized:
            raise InvalidInputError(f"{operation} needs a probability measure (total mass {self.total_mass!r})")

    def mass_near(self, x, tol=MERGE_TOL) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        hit = np.all(np.abs(self.points - x) <= tol, axis=1)
        return float(self._weights[hit].sum())

    def to_records(self):
        """Rows [x1, ..., xm, w] for CSV output."""
        return np.column_stack([self.points, self._weights])


class DiracCombination(DiscreteMeasure):
    """A normalized discrete measure viewed as an element of the Dirac combinations L(R^m)."""

    def __init__(self, support, weights, normalized: Optional[bool] = True):
        super().__init__(support, weights, normalized=True)

    @classmethod
    def from_measure(cls, mu: DiscreteMeasure) -> "DiracCombination":
        mu.require_normalized("a Dirac combination")
        return cls(mu.points, mu.weights)


def _check_dims(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.dim != nu.dim:
        raise InvalidInputError(f"dimension mismatch: {mu.dim} vs {nu.dim}")


def convolve(mu: DiscreteMeasure, nu: DiscreteMeasure, cap: int = CONVOLUTION_CAP) -> DiscreteMeasure:
    """Push-forward of mu x nu under addition."""
    _check_dims(mu, nu)
    mu.require_normalized("convolution")
    nu.require_normalized("convolution")
    pairs = len(mu) * len(nu)
    if pairs > cap:
        raise ResourceLimitError(f"convolution would enumerate {pairs} atom pairs, above the cap {cap}")
    points = (mu.points[:, None, :] + nu.points[None, :, :]).reshape(-1, mu.dim)
    weights = np.outer(mu.weights, nu.weights).reshape(-1)
    result = DiscreteMeasure(points, weights)
    logging.debug(f"convolved {len(mu)} x {len(nu)} atoms into {len(result)}")
    return result


def translate(mu: DiscreteMeasure, x) -> DiscreteMeasure:
    """(mu + x)(E) = mu(E + x): every atom moves from y to y - x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != mu.dim:
        raise InvalidInputError(f"translation vector has {x.size} coordinates, measure lives in R^{mu.dim}")
    return type(mu)(scale_coords(mu.points, 1.0, x), mu.weights, mu.normalized)


def scale_measure(mu: DiscreteMeasure, beta: float) -> DiscreteMeasure:
    """theta(E) = mu(beta E): every atom moves from y to y / beta."""
    if not beta > 0:
        raise InvalidInputError(f"scaling factor must be positive, got {beta}")
    return type(mu)(scale_coords(mu.points, beta), mu.weights, mu.normalized)


def mixture(components: Iterable[Tuple[float, DiscreteMeasure]]) -> DiscreteMeasure:
    """sum_j a_j mu_j; normalized exactly when the total mass is 1."""
    components = list(components)
    if not components:
        raise InvalidInputError("mixture needs at least one component")
    dims = {mu.dim for _, mu in components}
    if len(dims) != 1:
        raise InvalidInputError(f"mixture components live in different dimensions: {sorted(dims)}")
    points = []
    weights = []
    for a, mu in components:
        if not a > 0:
            raise InvalidInputError(f"mixture weights must be positive, got {a}")
        points.append(mu.points)
        weights.append(a * mu.weights)
    result = DiscreteMeasure(np.concatenate(points), np.concatenate(weights))
    if result.normalized:
        return DiracCombination(result.points, result.weights)
    return result


def kantorovich_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, cap: int = TRANSPORT_CAP) -> float:
    """
    d_L(mu, nu) = sup over 1-Lipschitz h of |int h dmu - int h dnu|.

    In R the value is the integral of the difference of the distribution functions.
    In higher dimensions the optimal transport program with Euclidean ground cost is
    solved exactly; it refuses combined supports above `cap`.
    """
    _check_dims(mu, nu)
    mu.require_normalized("Kantorovich distance")
    nu.require_normalized("Kantorovich distance")
    if mu.dim == 1:
        return float(wasserstein_distance(mu.points[:, 0], nu.points[:, 0], mu.weights, nu.weights))
    combined = len(mu) + len(nu)
    if combined > cap:
        raise ResourceLimitError(
            f"exact transport on {combined} atoms exceeds the cap {cap}; subsample or realize at a lower depth"
        )
    cost = cdist(mu.points, nu.points)
    a = mu.weights / mu.weights.sum()
    b = nu.weights / nu.weights.sum()
    return float(ot.emd2(a, b, cost, numItermax=1_000_000))


def domination_constant(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Smallest C with mu <= C nu; infinite when some atom of mu is not an atom of nu."""
    _check_dims(mu, nu)
    tree = cKDTree(nu.points)
    dist, index = tree.query(mu.points, p=np.inf)
    if np.any(dist > MERGE_TOL):
        return math.inf
    return float(np.max(mu.weights / nu.weights[index]))
