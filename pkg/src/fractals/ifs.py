#!/usr/bin/env python3
"""
ifs.py

Similarity iterated function systems: construction, separation certificates on
an invariant hull, finite realizations of invariant measures (depth
discretization and chaos game), product systems and the closed-form dimension
formulas that hold under the strong separation condition.

Status: Development
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import brentq

from fractals.config import DEPTH_CAP, HULL_MAX_ITER, HULL_TOL, ORTHOGONAL_TOL, PROBABILITY_TOL
from fractals.errors import InvalidInputError, NumericalFailureError, PreconditionError, ResourceLimitError
from fractals.geometry import PointSet
from fractals.measure import DiscreteMeasure
from utils.transformations import transform_box, transform_coords


@dataclass(frozen=True, eq=False)
class SimilarityMap:
    """x -> ratio * O x + offset."""

    ratio: float
    orthogonal: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        offset = np.array(self.offset, dtype=float).reshape(-1)
        orthogonal = np.array(self.orthogonal, dtype=float).reshape(offset.size, offset.size)
        if not (0 < self.ratio < 1):
            raise InvalidInputError(f"similarity ratio must lie in (0, 1), got {self.ratio}")
        if not np.allclose(orthogonal.T @ orthogonal, np.eye(offset.size), atol=ORTHOGONAL_TOL, rtol=0):
            raise InvalidInputError("linear part of a similarity map must be orthogonal")
        offset.setflags(write=False)
        orthogonal.setflags(write=False)
        object.__setattr__(self, "ratio", float(self.ratio))
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "orthogonal", orthogonal)

    @classmethod
    def scaling(cls, ratio, offset):
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        return cls(ratio, np.eye(offset.size), offset)

    @property
    def dim(self) -> int:
        return self.offset.size

    def apply(self, points) -> np.ndarray:
        return transform_coords(points, self.ratio, self.orthogonal, self.offset)

    def apply_box(self, lo, hi):
        return transform_box(lo, hi, self.ratio, self.orthogonal, self.offset)

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) - self.ratio * self.orthogonal, self.offset)

    def to_dict(self):
        return {
            "ratio": self.ratio,
            "offset": self.offset.tolist(),
            "orthogonal": self.orthogonal.tolist(),
        }


@dataclass(frozen=True, eq=False)
class IFSystem:
    """Similarity maps with a probability vector."""

    maps: Tuple[SimilarityMap, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        maps = tuple(self.maps)
        probabilities = np.array(self.probabilities, dtype=float).reshape(-1)
        if len(maps) < 2:
            raise InvalidInputError("an IFS needs at least two maps")
        if probabilities.size != len(maps):
            raise InvalidInputError(f"{len(maps)} maps but {probabilities.size} probabilities")
        if np.any(probabilities <= 0):
            raise InvalidInputError("probabilities must be strictly positive")
        if abs(math.fsum(probabilities) - 1.0) > PROBABILITY_TOL:
            raise InvalidInputError(f"probabilities sum to {math.fsum(probabilities)!r}, not 1")
        if len({m.dim for m in maps}) != 1:
            raise InvalidInputError("all maps must share the ambient dimension")
        probabilities.setflags(write=False)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "probabilities", probabilities)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.maps])

    def __len__(self):
        return len(self.maps)

    @classmethod
    def from_dict(cls, data):
        try:
            dim = int(data["dim"])
            maps = []
            for entry in data["maps"]:
                offset = np.asarray(entry["offset"], dtype=float).reshape(-1)
                if offset.size != dim:
                    raise InvalidInputError(f"offset {entry['offset']} does not have {dim} coordinates")
                orthogonal = entry.get("orthogonal", np.eye(dim).tolist())
                maps.append(SimilarityMap(float(entry["ratio"]), orthogonal, offset))
            probabilities = [float(p) for p in data["probabilities"]]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"malformed IFS description: {e}") from e
        return cls(tuple(maps), probabilities)

    def to_dict(self):
        return {
            "dim": self.dim,
            "maps": [m.to_dict() for m in self.maps],
            "probabilities": self.probabilities.tolist(),
        }


@dataclass(frozen=True)
class UniformCube:
    """Lebesgue measure on [0, 1]^dim, realized through the dyadic system."""

    dim: int = 1

    def as_ifs(self) -> IFSystem:
        return dyadic_system(self.dim)

    def to_dict(self):
        return {"uniform": True, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, other: "Box", tol=HULL_TOL) -> bool:
        return bool(np.all(other.lo >= self.lo - tol) and np.all(other.hi <= self.hi + tol))

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


class SeparationReport(NamedTuple):
    ssc_holds: bool
    margin: float
    hull: Box


class Discretization(NamedTuple):
    measure: DiscreteMeasure
    error_bound: float


def cantor_system(ratio, probabilities=None) -> IFSystem:
    """Two-branch central Cantor system on [0, 1]."""
    if probabilities is None:
        probabilities = (0.5, 0.5)
    maps = (SimilarityMap.scaling(ratio, 0.0), SimilarityMap.scaling(ratio, 1.0 - ratio))
    return IFSystem(maps, probabilities)


def equal_ratio_system(ratio, count, probabilities=None) -> IFSystem:
    """`count` maps of one ratio with offsets spread evenly over [0, 1]."""
    if probabilities is None:
        probabilities = np.full(count, 1.0 / count)
    offsets = np.linspace(0.0, 1.0 - ratio, count)
    return IFSystem(tuple(SimilarityMap.scaling(ratio, o) for o in offsets), probabilities)


def dyadic_system(dim=1) -> IFSystem:
    """2^dim half-size maps tiling [0, 1]^dim; its invariant measure is Lebesgue."""
    corners = list(itertools.product((0.0, 0.5), repeat=dim))
    maps = tuple(SimilarityMap.scaling(0.5, corner) for corner in corners)
    return IFSystem(maps, np.full(len(maps), 1.0 / len(maps)))


def _box_change(a_lo, a_hi, b_lo, b_hi) -> float:
    return float(np.linalg.norm(np.maximum(np.abs(a_lo - b_lo), np.abs(a_hi - b_hi))))


def attractor_hull(I: IFSystem) -> Box:
    """Axis-aligned box containing the attractor and mapped into itself by every map."""
    fixed = np.array([m.fixed_point() for m in I.maps])
    lo, hi = fixed.min(axis=0), fixed.max(axis=0)
    c_max = float(I.ratios.max())
    for iteration in range(HULL_MAX_ITER):
        images = [m.apply_box(lo, hi) for m in I.maps]
        new_lo = np.min([img[0] for img in images], axis=0)
        new_hi = np.max([img[1] for img in images], axis=0)
        change = _box_change(lo, hi, new_lo, new_hi)
        lo, hi = new_lo, new_hi
        if change < HULL_TOL:
            logging.debug(f"hull converged after {iteration + 1} iterations (change {change:.3g})")
            # the limit box is within change * c / (1 - c) of the current one
            pad = change * c_max / (1 - c_max)
            return Box(lo - pad, hi + pad)
    raise NumericalFailureError(f"attractor hull did not converge after {HULL_MAX_ITER} iterations")


def _signed_gap(a_lo, a_hi, b_lo, b_hi) -> float:
    separation = np.maximum(b_lo - a_hi, a_lo - b_hi)
    if np.any(separation > 0):
        return float(np.linalg.norm(np.clip(separation, 0, None)))
    return float(separation.max())


def verify_ssc(I: IFSystem) -> SeparationReport:
    """Certify the strong separation condition on the invariant hull."""
    hull = attractor_hull(I)
    images = [m.apply_box(hull.lo, hull.hi) for m in I.maps]
    margin = math.inf
    for i, j in itertools.combinations(range(len(images)), 2):
        margin = min(margin, _signed_gap(images[i][0], images[i][1], images[j][0], images[j][1]))
    if abs(margin) <= HULL_TOL:
        # gaps below the hull resolution are rounding in the box arithmetic: the images touch
        margin = 0.0
    return SeparationReport(margin > 0, margin, hull)


def discretize_depth(I: IFSystem, k: int, cap: int = DEPTH_CAP) -> Discretization:
    """Images of the hull center under all words of length k, weighted by word probabilities."""
    if k < 0:
        raise InvalidInputError(f"depth must be nonnegative, got {k}")
    size = len(I) ** k
    if size > cap:
        raise ResourceLimitError(f"depth {k} needs N^k = {size} atoms, above the cap {cap}")
    hull = attractor_hull(I)
    points = hull.center.reshape(1, -1)
    weights = np.ones(1)
    for _ in range(k):
        # word order: the newly applied (outermost) letter varies slowest
        points = np.concatenate([m.apply(points) for m in I.maps])
        weights = np.concatenate([p * weights for p in I.probabilities])
    bound = float(I.ratios.max()) ** k * hull.diameter
    return Discretization(DiscreteMeasure(points, weights), bound)


def chaos_game_choices(I: IFSystem, count: int, seed) -> np.ndarray:
    """The map indices drawn by the chaos game for a seed."""
    rng = np.random.default_rng(seed)
    return rng.choice(len(I), size=count, p=I.probabilities / I.probabilities.sum())


def chaos_game(I: IFSystem, n: int, burn_in: int = 1000, seed=0) -> PointSet:
    """Random-iteration sample of the invariant measure, burn-in discarded."""
    if n < 1:
        raise InvalidInputError("chaos game needs n >= 1")
    choices = chaos_game_choices(I, burn_in + n, seed)
    x = I.maps[0].fixed_point()
    samples = np.empty((n, I.dim))
    for step, index in enumerate(choices):
        x = I.maps[index].apply(x)[0]
        if step >= burn_in:
            samples[step - burn_in] = x
    return PointSet(samples)


def common_ratio(*systems: IFSystem) -> float:
    ratios = np.concatenate([s.ratios for s in systems])
    if np.ptp(ratios) > PROBABILITY_TOL:
        raise InvalidInputError(f"product systems need one common ratio, got {sorted(set(ratios.tolist()))}")
    return float(ratios[0])


def _product_of(factors: Sequence[IFSystem]) -> IFSystem:
    # words over the factors, first factor varying slowest
    c = common_ratio(*factors)
    maps = []
    weights = []
    for word in itertools.product(*(range(len(f)) for f in factors)):
        letters = [f.maps[i] for f, i in zip(factors, word)]
        orthogonal = block_diag(*(m.orthogonal for m in letters))
        maps.append(SimilarityMap(c, orthogonal, np.concatenate([m.offset for m in letters])))
        weights.append(math.prod(f.probabilities[i] for f, i in zip(factors, word)))
    return IFSystem(tuple(maps), np.array(weights))


def product_ifs(I1: IFSystem, I2: IFSystem) -> IFSystem:
    """Maps f_i x g_j on R^(m1+m2) with weights p_i q_j."""
    if len(I1) != len(I2):
        raise InvalidInputError(f"product systems need equally many maps, got {len(I1)} and {len(I2)}")
    return _product_of((I1, I2))


def _require_ssc(I: IFSystem, formula: str):
    report = verify_ssc(I)
    if not report.ssc_holds:
        raise PreconditionError(f"{formula} needs the strong separation condition (hull margin {report.margin:.3g})")


def lower_dim_formula(I: IFSystem) -> float:
    """min_i log p_i / log c_i for an SSC system."""
    _require_ssc(I, "lower dimension formula")
    return float(np.min(np.log(I.probabilities) / np.log(I.ratios)))


def hausdorff_dim_formula(I: IFSystem) -> float:
    """Entropy over Lyapunov exponent of the invariant measure."""
    _require_ssc(I, "Hausdorff dimension formula")
    p = I.probabilities
    entropy = -float(np.sum(p * np.log(p)))
    lyapunov = -float(np.sum(p * np.log(I.ratios)))
    return entropy / lyapunov


def similarity_dim(I: IFSystem) -> float:
    """Hausdorff dimension of the attractor: the root s of sum c_i^s = 1."""
    _require_ssc(I, "similarity dimension")
    c = I.ratios
    upper = I.dim + 1.0
    return float(brentq(lambda s: np.sum(c ** s) - 1.0, 0.0, upper, xtol=1e-15))


def product_lower_dim(I1: IFSystem, I2: IFSystem) -> float:
    """s + t, cross-checked against the formula on the product system."""
    product = product_ifs(I1, I2)
    total = lower_dim_formula(I1) + lower_dim_formula(I2)
    direct = lower_dim_formula(product)
    if abs(total - direct) > 1e-12:
        raise NumericalFailureError(f"product additivity failed: {total!r} vs {direct!r}")
    return total


def power_system(I: IFSystem, copies: int) -> IFSystem:
    """I x I x ... x I (copies factors), len(I) ** copies maps."""
    if copies < 1:
        raise InvalidInputError(f"power system needs at least one factor, got {copies}")
    if copies == 1:
        return I
    return _product_of((I,) * copies)


def designate(per_axis_dim: float, dim: int, probabilities: Optional[Sequence[float]] = None):
    """Equal-weight two-map system (or uniform cube) whose per-axis dimension is per_axis_dim."""
    if per_axis_dim >= 1.0 - 1e-15:
        return UniformCube(dim)
    base = cantor_system(2.0 ** (-1.0 / per_axis_dim), probabilities)
    return power_system(base, dim)
